//! Binary particle-swarm feature selection with a nearest-neighbour wrapper
//! fitness.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nn::{build_dense_ann, evaluate, train, Dataset, TrainConfig};
use crate::util::{derive_seed, seeded_rng};
use crate::{Class, Error, Result};

/// Selected feature subset and its wrapper fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub bits: Vec<bool>,
    pub fitness: f64,
    pub seed: u64,
}

impl FeatureMask {
    pub fn selected(&self) -> Vec<usize> {
        selected(&self.bits)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Keeps only the masked columns of `row`.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.bits).filter(|(_, &b)| b).map(|(&v, _)| v).collect()
    }
}

fn selected(bits: &[bool]) -> Vec<usize> {
    bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Classifier scored inside the wrapper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitnessKind {
    #[default]
    NearestNeighbor,
    /// Dense network trained on each training fold (slow).
    Ann { hidden: Vec<usize>, epochs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub v_max: f64,
    pub seed: u64,
    pub folds: usize,
    pub fitness: FitnessKind,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            particles: 20,
            iterations: 50,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            v_max: 4.0,
            seed: 0,
            folds: 5,
            fitness: FitnessKind::NearestNeighbor,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("swarm config: {msg}")));
        if self.particles < 2 {
            return bad("particles must be at least 2");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return bad("inertia must be in [0, 1]");
        }
        if !(self.cognitive > 0.0 && self.social > 0.0) {
            return bad("cognitive and social weights must be positive");
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad("v_max must be positive");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if let FitnessKind::Ann { hidden, epochs } = &self.fitness {
            if hidden.is_empty() || hidden.contains(&0) || *epochs == 0 {
                return bad("ann fitness needs non-empty hidden widths and positive epochs");
            }
        }
        Ok(())
    }
}

/// Fold index of every sample: each class is shuffled with its own stream
/// and dealt round-robin.
fn stratified_folds(labels: &[Class], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let mut assignment = vec![0; labels.len()];
    for class in Class::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::InsufficientClass {
                class,
                count: members.len(),
                required: folds,
            });
        }
        members.shuffle(&mut seeded_rng(seed, class.index() as u64));
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok(assignment)
}

fn check_matrix(features: &[Vec<f64>], labels: &[Class]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: vec![labels.len()],
            got: vec![features.len()],
        });
    }
    let width = features.first().map_or(0, |r| r.len());
    if width == 0 {
        return Err(Error::InvalidParameter("feature matrix is empty".into()));
    }
    if let Some(row) = features.iter().find(|r| r.len() != width) {
        return Err(Error::ShapeMismatch {
            expected: vec![width],
            got: vec![row.len()],
        });
    }
    Ok(width)
}

/// Masked columns of the chosen rows, z-scored with statistics of `fit_rows`.
fn standardized(features: &[Vec<f64>], columns: &[usize], fit_rows: &[usize], rows: &[usize]) -> Vec<Vec<f64>> {
    let n = fit_rows.len() as f64;
    let stats: Vec<(f64, f64)> = columns
        .iter()
        .map(|&c| {
            let mean = fit_rows.iter().map(|&r| features[r][c]).sum::<f64>() / n;
            let var = fit_rows.iter().map(|&r| (features[r][c] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            (mean, if sd > 0.0 { sd } else { 1.0 })
        })
        .collect();
    rows.iter()
        .map(|&r| {
            columns
                .iter()
                .zip(&stats)
                .map(|(&c, &(m, s))| (features[r][c] - m) / s)
                .collect()
        })
        .collect()
}

fn nearest_neighbor_accuracy(train_x: &[Vec<f64>], train_y: &[Class], test_x: &[Vec<f64>], test_y: &[Class]) -> f64 {
    let correct = test_x
        .iter()
        .zip(test_y)
        .filter(|(q, &y)| {
            let mut best = f64::INFINITY;
            let mut label = train_y[0];
            for (x, &l) in train_x.iter().zip(train_y) {
                let d: f64 = x.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best {
                    best = d;
                    label = l;
                }
            }
            label == y
        })
        .count();
    correct as f64 / test_x.len() as f64
}

fn ann_accuracy(
    train_x: Vec<Vec<f64>>,
    train_y: &[Class],
    test_x: Vec<Vec<f64>>,
    test_y: &[Class],
    hidden: &[usize],
    epochs: usize,
    seed: u64,
) -> Result<f64> {
    let dim = train_x[0].len();
    let to_dataset = |x: Vec<Vec<f64>>, y: &[Class]| {
        Dataset::new(vec![dim], x.concat(), y.iter().map(|c| c.index()).collect())
    };
    let train_set = to_dataset(train_x, train_y)?;
    let test_set = to_dataset(test_x, test_y)?;
    let config = TrainConfig {
        epochs,
        batch_size: 16,
        learning_rate: 0.01,
        monitor_epochs: epochs,
        seed,
        ..TrainConfig::default()
    };
    let ckpt = train(build_dense_ann(dim, hidden, seed)?, &train_set, &train_set, &config)?;
    Ok(evaluate(&ckpt.network, &test_set)?.1)
}

fn fitness_with(
    mask: &[bool],
    features: &[Vec<f64>],
    labels: &[Class],
    folds: &[usize],
    k: usize,
    kind: &FitnessKind,
    seed: u64,
) -> Result<f64> {
    let columns = selected(mask);
    if columns.is_empty() {
        return Err(Error::InvalidParameter("feature mask selects nothing".into()));
    }
    let mut total = 0.0;
    for fold in 0..k {
        let (test, fit): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| folds[i] == fold);
        let train_x = standardized(features, &columns, &fit, &fit);
        let test_x = standardized(features, &columns, &fit, &test);
        let train_y: Vec<Class> = fit.iter().map(|&i| labels[i]).collect();
        let test_y: Vec<Class> = test.iter().map(|&i| labels[i]).collect();
        total += match kind {
            FitnessKind::NearestNeighbor => nearest_neighbor_accuracy(&train_x, &train_y, &test_x, &test_y),
            FitnessKind::Ann { hidden, epochs } => ann_accuracy(
                train_x,
                &train_y,
                test_x,
                &test_y,
                hidden,
                *epochs,
                derive_seed(seed, fold as u64),
            )?,
        };
    }
    Ok(total / k as f64)
}

/// Mean stratified `folds`-fold accuracy of a 1-nearest-neighbour classifier
/// on the masked, per-fold z-scored columns. Distance ties go to the
/// earliest training sample.
pub fn wrapper_fitness(mask: &[bool], features: &[Vec<f64>], labels: &[Class], folds: usize, seed: u64) -> Result<f64> {
    let width = check_matrix(features, labels)?;
    if mask.len() != width {
        return Err(Error::ShapeMismatch {
            expected: vec![width],
            got: vec![mask.len()],
        });
    }
    if folds < 2 {
        return Err(Error::InvalidParameter("folds must be at least 2".into()));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    fitness_with(mask, features, labels, &assignment, folds, &FitnessKind::NearestNeighbor, seed)
}

/// Outcome of a swarm run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub mask: FeatureMask,
    /// Global-best fitness after each iteration.
    pub trace: Vec<f64>,
    /// Fraction of all visited particle positions that had each bit set.
    pub frequency: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_names: Vec<String>,
    pub config: SwarmConfig,
}

impl SelectionReport {
    /// Indices of the `k` most frequently selected features, ties to the
    /// lower index.
    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.frequency.len()).collect();
        order.sort_by(|&a, &b| self.frequency[b].total_cmp(&self.frequency[a]).then(a.cmp(&b)));
        order.truncate(k);
        order
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn sample_position(velocity: &[f64], rng: &mut impl Rng) -> Vec<bool> {
    let mut bits: Vec<bool> = velocity.iter().map(|&v| rng.random::<f64>() < sigmoid(v)).collect();
    if !bits.contains(&true) {
        let mut best = 0;
        for (i, &v) in velocity.iter().enumerate() {
            if v > velocity[best] {
                best = i;
            }
        }
        bits[best] = true;
    }
    bits
}

/// Binary particle swarm over feature masks. Positions are resampled each
/// iteration from the sigmoid of clamped velocities; the returned mask is
/// the global best (ties keep the earlier find).
pub fn pso_select(features: &[Vec<f64>], labels: &[Class], config: &SwarmConfig) -> Result<SelectionReport> {
    config.validate()?;
    let width = check_matrix(features, labels)?;
    for class in Class::ALL {
        let count = labels.iter().filter(|&&l| l == class).count();
        if count < 2 {
            return Err(Error::InsufficientClass {
                class,
                count,
                required: 2,
            });
        }
    }
    let assignment = stratified_folds(labels, config.folds, config.seed)?;
    let mut cache: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut rngs: Vec<_> = (0..config.particles)
        .map(|p| seeded_rng(derive_seed(config.seed, 0x5057_4d), p as u64))
        .collect();
    let mut velocities: Vec<Vec<f64>> = rngs
        .iter_mut()
        .map(|rng| (0..width).map(|_| rng.random_range(-config.v_max..config.v_max)).collect())
        .collect();
    let mut positions: Vec<Vec<bool>> = velocities
        .iter()
        .zip(rngs.iter_mut())
        .map(|(v, rng)| sample_position(v, rng))
        .collect();
    let mut personal: Vec<(Vec<bool>, f64)> = Vec::new();
    let mut global: Option<(Vec<bool>, f64)> = None;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut counts = vec![0usize; width];

    for iteration in 0..config.iterations {
        if iteration > 0 {
            let (gbest, _) = global.as_ref().expect("global best after first iteration");
            for p in 0..config.particles {
                let rng = &mut rngs[p];
                for d in 0..width {
                    let x = positions[p][d] as u8 as f64;
                    let pb = personal[p].0[d] as u8 as f64;
                    let gb = gbest[d] as u8 as f64;
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    let v = config.inertia * velocities[p][d]
                        + config.cognitive * r1 * (pb - x)
                        + config.social * r2 * (gb - x);
                    velocities[p][d] = v.clamp(-config.v_max, config.v_max);
                }
                positions[p] = sample_position(&velocities[p], rng);
            }
        }

        let mut pending: Vec<Vec<bool>> = positions.iter().filter(|m| !cache.contains_key(*m)).cloned().collect();
        pending.sort();
        pending.dedup();
        let scored: Vec<(Vec<bool>, Result<f64>)> = pending
            .into_par_iter()
            .map(|m| {
                let f = fitness_with(&m, features, labels, &assignment, config.folds, &config.fitness, config.seed);
                (m, f)
            })
            .collect();
        for (m, f) in scored {
            cache.insert(m, f?);
        }

        for (p, pos) in positions.iter().enumerate() {
            for (c, &b) in counts.iter_mut().zip(pos) {
                *c += b as usize;
            }
            let f = cache[pos];
            if iteration == 0 {
                personal.push((pos.clone(), f));
            } else if f > personal[p].1 {
                personal[p] = (pos.clone(), f);
            }
            if global.as_ref().is_none_or(|(_, g)| f > *g) {
                global = Some((pos.clone(), f));
            }
        }
        trace.push(global.as_ref().unwrap().1);
    }

    let (bits, fitness) = global.expect("at least one iteration");
    let visits = (config.particles * config.iterations) as f64;
    Ok(SelectionReport {
        mask: FeatureMask {
            bits,
            fitness,
            seed: config.seed,
        },
        trace,
        frequency: counts.iter().map(|&c| c as f64 / visits).collect(),
        feature_names: Vec::new(),
        config: config.clone(),
    })
}
