use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Checkpoint, Network, Tensor};
use crate::util::{derive_seed, seeded_rng};
use crate::{Error, Result};

/// Full-batch SGD learning rate below which the training loss of a
/// sigmoid/softmax dense network on standardized inputs decreases
/// monotonically.
pub const SGD_STABLE_LEARNING_RATE: f64 = 0.1;

const EVAL_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    /// Heavy-ball momentum 0.9.
    SgdMomentum,
    /// β₁ 0.9, β₂ 0.999, ε 1e-8.
    #[default]
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Patience, in epochs, when `early_stopping` is on.
    pub monitor_epochs: usize,
    pub early_stopping: bool,
    /// Independent initializations; the best validation snapshot over all of
    /// them wins.
    pub restarts: usize,
    pub seed: u64,
    pub augmentation: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            monitor_epochs: 10,
            early_stopping: false,
            restarts: 1,
            seed: 0,
            augmentation: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("train config: {msg}")));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.monitor_epochs == 0 || self.monitor_epochs > self.epochs {
            return bad("monitor_epochs must be in 1..=epochs");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        Ok(())
    }
}

/// Samples stored contiguously with class-index labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample_shape: Vec<usize>,
    pub inputs: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(sample_shape: Vec<usize>, inputs: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        let item: usize = sample_shape.iter().product();
        if item == 0 || inputs.len() != item * labels.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![labels.len() * item],
                got: vec![inputs.len()],
            });
        }
        Ok(Dataset {
            sample_shape,
            inputs,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn item_len(&self) -> usize {
        self.sample_shape.iter().product()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let n = self.item_len();
        &self.inputs[i * n..(i + 1) * n]
    }

    pub fn batch(&self, indices: &[usize]) -> Tensor {
        let mut data = Vec::with_capacity(indices.len() * self.item_len());
        for &i in indices {
            data.extend_from_slice(self.sample(i));
        }
        let mut shape = vec![indices.len()];
        shape.extend_from_slice(&self.sample_shape);
        Tensor::from_parts(shape, data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Zero-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Evaluation-mode loss, accuracy and positive-class probabilities.
pub fn evaluate(net: &Network, data: &Dataset) -> Result<(f64, f64, Vec<f64>)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut positive = Vec::with_capacity(data.len());
    let indices: Vec<usize> = (0..data.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let probs = net.forward(&data.batch(chunk), false)?;
        let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
        loss += super::cross_entropy(&probs, &labels) * chunk.len() as f64;
        let k = probs.item_len();
        for (row, &l) in probs.data().chunks(k).zip(&labels) {
            correct += (argmax(row) == l) as usize;
            positive.push(row[1.min(k - 1)]);
        }
    }
    let n = data.len().max(1) as f64;
    Ok((loss / n, correct as f64 / n, positive))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Optimizer {
    fn new(kind: OptimizerKind, lr: f64, net: &Network) -> Self {
        let zeros: Vec<Vec<f64>> = net.parameters().iter().map(|t| vec![0.0; t.len()]).collect();
        Optimizer {
            kind,
            lr,
            step: 0,
            v: if kind == OptimizerKind::Adam { zeros.clone() } else { Vec::new() },
            m: zeros,
        }
    }

    fn apply(&mut self, net: &mut Network, grads: &[Vec<f64>]) {
        self.step += 1;
        let lr = self.lr;
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        for (k, (p, g)) in net.parameters_mut().into_iter().zip(grads).enumerate() {
            match self.kind {
                OptimizerKind::Sgd => p.iter_mut().zip(g).for_each(|(w, gi)| *w -= lr * gi),
                OptimizerKind::SgdMomentum => {
                    for ((w, gi), m) in p.iter_mut().zip(g).zip(self.m[k].iter_mut()) {
                        *m = 0.9 * *m + gi;
                        *w -= lr * *m;
                    }
                }
                OptimizerKind::Adam => {
                    for (((w, gi), m), v) in p.iter_mut().zip(g).zip(self.m[k].iter_mut()).zip(self.v[k].iter_mut()) {
                        *m = b1 * *m + (1.0 - b1) * gi;
                        *v = b2 * *v + (1.0 - b2) * gi * gi;
                        *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    }
                }
            }
        }
        net.round_to_precision();
    }
}

/// In-place perturbation of one training sample.
pub type Augmenter<'a> = &'a (dyn Fn(&mut [f64], &mut ChaCha8Rng) + Sync);

/// Mini-batch training returning the best validation snapshot.
pub fn train(net: Network, train_set: &Dataset, val_set: &Dataset, config: &TrainConfig) -> Result<Checkpoint> {
    train_with_augmentation(net, train_set, val_set, config, None)
}

/// As [`train`]; when `config.augmentation` is set, every training sample
/// passes through `augment` each time it is drawn.
pub fn train_with_augmentation(
    net: Network,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TrainConfig,
    augment: Option<Augmenter<'_>>,
) -> Result<Checkpoint> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InvalidParameter("training and validation sets must be non-empty".into()));
    }
    for d in [train_set, val_set] {
        if d.sample_shape != net.input_shape() {
            return Err(Error::ShapeMismatch {
                expected: net.input_shape().to_vec(),
                got: d.sample_shape.clone(),
            });
        }
    }
    for class in crate::Class::ALL {
        let count = train_set.labels.iter().filter(|&&l| l == class.index()).count();
        if count == 0 {
            return Err(Error::InsufficientClass {
                class,
                count,
                required: 1,
            });
        }
    }

    let mut best: Option<Checkpoint> = None;
    for restart in 0..config.restarts {
        let start = if restart == 0 {
            net.clone()
        } else {
            net.reinitialized(derive_seed(net.seed(), restart as u64))?
        };
        let run = train_once(start, train_set, val_set, config, augment, restart as u64)?;
        if best.as_ref().is_none_or(|b| run.val_accuracy > b.val_accuracy) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn train_once(
    mut net: Network,
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TrainConfig,
    augment: Option<Augmenter<'_>>,
    stream: u64,
) -> Result<Checkpoint> {
    let mut rng = seeded_rng(config.seed, stream);
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate, &net);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, Network)> = None;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let mut batch = train_set.batch(chunk);
            if config.augmentation {
                if let Some(f) = augment {
                    let n = batch.item_len();
                    for sample in batch.data_mut().chunks_mut(n) {
                        f(sample, &mut rng);
                    }
                }
            }
            let labels: Vec<usize> = chunk.iter().map(|&i| train_set.labels[i]).collect();
            let (loss, probs, grads, moments) = net.loss_and_gradients(&batch, &labels)?;
            if !loss.is_finite() || grads.iter().flatten().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            loss_sum += loss * chunk.len() as f64;
            let k = probs.item_len();
            correct += probs
                .data()
                .chunks(k)
                .zip(&labels)
                .filter(|(row, &l)| argmax(row) == l)
                .count();
            net.update_running_stats(&moments);
            optimizer.apply(&mut net, &grads);
        }
        let n = train_set.len() as f64;
        let (val_loss, val_accuracy, _) = evaluate(&net, val_set)?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / n,
            train_accuracy: correct as f64 / n,
            val_loss,
            val_accuracy,
        });
        if best.as_ref().is_none_or(|(_, acc, _)| val_accuracy > *acc) {
            best = Some((epoch, val_accuracy, net.clone()));
        }
        let best_epoch = best.as_ref().map_or(0, |b| b.0);
        if config.early_stopping && epoch - best_epoch >= config.monitor_epochs {
            break;
        }
    }
    let (epoch, val_accuracy, network) = best.expect("at least one epoch");
    Ok(Checkpoint {
        network,
        epoch,
        val_accuracy,
        history,
        seed: config.seed,
        metadata: serde_json::Value::Null,
    })
}
