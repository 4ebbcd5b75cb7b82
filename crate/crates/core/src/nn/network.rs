use rand_chacha::ChaCha8Rng;

use super::layers::{Cache, Layer, LayerSpec};
use super::{Precision, Tensor, LOG_CLAMP};
use crate::util::seeded_rng;
use crate::{Error, Result};

/// Batch moments a BatchNorm layer saw during a training-mode pass.
pub(crate) struct BatchMoments {
    pub layer: usize,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: usize,
}

/// A feed-forward stack of layers with materialized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    specs: Vec<LayerSpec>,
    input_shape: Vec<usize>,
    /// Per-sample output shape of every layer.
    shapes: Vec<Vec<usize>>,
    seed: u64,
    precision: Precision,
    pub(crate) layers: Vec<Layer>,
}

/// Per-sample shape after every layer, or the first incompatibility.
pub(crate) fn shape_chain(specs: &[LayerSpec], input_shape: &[usize]) -> Result<Vec<Vec<usize>>> {
    if input_shape.is_empty() || input_shape.contains(&0) {
        return Err(Error::InvalidParameter(format!("invalid input shape {input_shape:?}")));
    }
    let mut shapes = Vec::with_capacity(specs.len());
    let mut current = input_shape.to_vec();
    for (i, spec) in specs.iter().enumerate() {
        current = spec.output_shape(&current).map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::InvalidParameter(format!("layer {i}: {msg}")),
            other => other,
        })?;
        shapes.push(current.clone());
    }
    Ok(shapes)
}

impl Network {
    /// Builds a network; layer `i` draws its initial weights from stream `i`
    /// of a generator seeded with `seed`.
    pub fn new(specs: Vec<LayerSpec>, input_shape: Vec<usize>, seed: u64) -> Result<Self> {
        Self::with_precision(specs, input_shape, seed, Precision::default())
    }

    pub fn with_precision(
        specs: Vec<LayerSpec>,
        input_shape: Vec<usize>,
        seed: u64,
        precision: Precision,
    ) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidParameter("network has no layers".into()));
        }
        let shapes = shape_chain(&specs, &input_shape)?;
        let mut layers = Vec::with_capacity(specs.len());
        let mut current = input_shape.clone();
        for (i, spec) in specs.iter().enumerate() {
            let mut rng: ChaCha8Rng = seeded_rng(seed, i as u64);
            layers.push(Layer::new(spec, &current, &mut rng)?);
            current = shapes[i].clone();
        }
        let mut net = Network {
            specs,
            input_shape,
            shapes,
            seed,
            precision,
            layers,
        };
        net.round_to_precision();
        Ok(net)
    }

    /// Same architecture and precision, fresh weights from `seed`.
    pub fn reinitialized(&self, seed: u64) -> Result<Self> {
        Self::with_precision(self.specs.clone(), self.input_shape.clone(), seed, self.precision)
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        self.shapes.last().expect("network has layers")
    }

    pub fn shapes(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Switching to `F32` rounds every stored value.
    pub fn set_precision(&mut self, precision: Precision) {
        self.precision = precision;
        self.round_to_precision();
    }

    pub(crate) fn round_to_precision(&mut self) {
        let p = self.precision;
        for t in self.state_mut() {
            p.apply(t);
        }
    }

    /// Layers that own trainable parameters.
    pub fn weighted_layer_count(&self) -> usize {
        self.layers.iter().filter(|l| !l.params().is_empty()).count()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    /// Trainable tensors in layer order (weights then bias; gamma then beta).
    pub fn parameters(&self) -> Vec<&Vec<f64>> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub(crate) fn parameters_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Every stored tensor in layer order: parameters followed, per layer, by
    /// running statistics.
    pub fn state(&self) -> Vec<&Vec<f64>> {
        self.layers
            .iter()
            .flat_map(|l| l.params().into_iter().chain(l.buffers()))
            .collect()
    }

    pub(crate) fn state_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| match l {
                Layer::Conv2d(c) => vec![&mut c.weights, &mut c.bias],
                Layer::Dense(d) => vec![&mut d.weights, &mut d.bias],
                Layer::BatchNorm(b) => vec![&mut b.gamma, &mut b.beta, &mut b.running_mean, &mut b.running_var],
                _ => vec![],
            })
            .collect()
    }

    /// Mutable access to the final dense layer's weights and bias.
    pub fn last_dense_mut(&mut self) -> Option<(&mut Vec<f64>, &mut Vec<f64>)> {
        self.layers.iter_mut().rev().find_map(|l| match l {
            Layer::Dense(d) => Some((&mut d.weights, &mut d.bias)),
            _ => None,
        })
    }

    fn check_input(&self, batch: &Tensor) -> Result<()> {
        if batch.shape().len() < 2 || batch.shape()[1..] != self.input_shape[..] {
            let got = batch.shape().get(1..).unwrap_or(&[]).to_vec();
            return Err(Error::ShapeMismatch {
                expected: self.input_shape.clone(),
                got,
            });
        }
        Ok(())
    }

    /// Class probabilities `(batch, classes)`. Training mode normalizes with
    /// batch statistics; evaluation mode with running averages.
    pub fn forward(&self, batch: &Tensor, training: bool) -> Result<Tensor> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            x = layer.forward(x, training, false).0;
            debug_assert!(x.is_finite(), "non-finite activation");
        }
        Ok(x)
    }

    /// Probability of the positive (index 1) class per sample.
    pub fn predict_positive(&self, batch: &Tensor) -> Result<Vec<f64>> {
        let out = self.forward(batch, false)?;
        let k = out.item_len();
        Ok(out.data().chunks(k).map(|row| row[1.min(k - 1)]).collect())
    }

    /// Training-mode loss, gradients in [`Network::parameters`] order and the
    /// batch moments every BatchNorm layer observed.
    pub(crate) fn loss_and_gradients(
        &self,
        batch: &Tensor,
        labels: &[usize],
    ) -> Result<(f64, Tensor, Vec<Vec<f64>>, Vec<BatchMoments>)> {
        self.check_input(batch)?;
        check_labels(batch.batch(), labels, *self.output_shape().last().unwrap())?;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let (y, cache) = layer.forward(x, true, true);
            caches.push(cache.expect("cache requested"));
            x = y;
        }
        let probs = x;
        let loss = cross_entropy(&probs, labels);
        let n = labels.len() as f64;
        let k = probs.item_len();
        let mut dy = Tensor::zeros(probs.shape().to_vec());
        for (i, &label) in labels.iter().enumerate() {
            let p = probs.data()[i * k + label];
            if p > LOG_CLAMP {
                dy.data_mut()[i * k + label] = -1.0 / (n * p);
            }
        }
        let mut per_layer: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(&caches).rev() {
            let mut g = Vec::new();
            dy = layer.backward(cache, dy, &mut g);
            per_layer.push(g);
        }
        per_layer.reverse();
        let grads = per_layer.into_iter().flatten().collect();
        let moments = caches
            .into_iter()
            .enumerate()
            .filter_map(|(layer, c)| match c {
                Cache::BatchNorm {
                    mean, var, count, ..
                } => Some(BatchMoments {
                    layer,
                    mean,
                    var,
                    count,
                }),
                _ => None,
            })
            .collect();
        Ok((loss, probs, grads, moments))
    }

    /// Training-mode cross-entropy of `batch`.
    pub fn loss(&self, batch: &Tensor, labels: &[usize]) -> Result<f64> {
        let probs = self.forward(batch, true)?;
        check_labels(batch.batch(), labels, probs.item_len())?;
        Ok(cross_entropy(&probs, labels))
    }

    pub(crate) fn update_running_stats(&mut self, moments: &[BatchMoments]) {
        for m in moments {
            if let Layer::BatchNorm(b) = &mut self.layers[m.layer] {
                b.update_running(&m.mean, &m.var, m.count);
                self.precision.apply(&mut b.running_mean);
                self.precision.apply(&mut b.running_var);
            }
        }
    }
}

fn check_labels(batch: usize, labels: &[usize], classes: usize) -> Result<()> {
    if labels.len() != batch {
        return Err(Error::InvalidParameter(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidParameter(format!("label {bad} out of range for {classes} classes")));
    }
    Ok(())
}

/// Mean categorical cross-entropy with the probability clamped at
/// [`LOG_CLAMP`].
pub fn cross_entropy(probs: &Tensor, labels: &[usize]) -> f64 {
    let k = probs.item_len();
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| -probs.data()[i * k + l].max(LOG_CLAMP).ln())
        .sum();
    total / labels.len() as f64
}

fn scaled(width: usize, scale: f64) -> usize {
    ((width as f64 * scale).ceil() as usize).max(1)
}

/// Layer list of the custom CNN with filter counts and dense widths
/// multiplied by `scale`.
pub fn custom_cnn_specs(scale: f64) -> Result<Vec<LayerSpec>> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidParameter(format!("cnn scale {scale} outside (0, 1]")));
    }
    let conv = |filters: usize, stride| LayerSpec::Conv2d {
        kernel: (3, 3),
        filters: scaled(filters, scale),
        stride,
    };
    Ok(vec![
        conv(32, 1),
        LayerSpec::Relu,
        conv(64, 2),
        LayerSpec::Relu,
        conv(64, 2),
        LayerSpec::Relu,
        LayerSpec::batch_norm(),
        LayerSpec::MaxPool { size: 2, stride: 2 },
        LayerSpec::Flatten,
        LayerSpec::Dense {
            units: scaled(1024, scale),
        },
        LayerSpec::Sigmoid,
        LayerSpec::Dense {
            units: scaled(512, scale),
        },
        LayerSpec::Sigmoid,
        LayerSpec::Dense { units: 2 },
        LayerSpec::Softmax,
    ])
}

/// Custom CNN for `(height, width, channels)` inputs.
pub fn build_custom_cnn(input_shape: (usize, usize, usize), scale: f64, seed: u64) -> Result<Network> {
    let (h, w, c) = input_shape;
    if h < 16 || w < 16 {
        return Err(Error::InvalidParameter(format!(
            "cnn input {h}x{w} too small, need at least 16x16"
        )));
    }
    Network::new(custom_cnn_specs(scale)?, vec![h, w, c], seed)
}

/// Sigmoid hidden layers of the given widths followed by a two-way softmax.
pub fn build_dense_ann(input_dim: usize, hidden: &[usize], seed: u64) -> Result<Network> {
    if input_dim == 0 {
        return Err(Error::InvalidParameter("dense network input dimension is zero".into()));
    }
    if hidden.is_empty() {
        return Err(Error::InvalidParameter("dense network needs at least one hidden layer".into()));
    }
    if hidden.contains(&0) {
        return Err(Error::InvalidParameter(format!("zero-width hidden layer in {hidden:?}")));
    }
    let mut specs = Vec::new();
    for &units in hidden {
        specs.push(LayerSpec::Dense { units });
        specs.push(LayerSpec::Sigmoid);
    }
    specs.push(LayerSpec::Dense { units: 2 });
    specs.push(LayerSpec::Softmax);
    Network::new(specs, vec![input_dim], seed)
}
