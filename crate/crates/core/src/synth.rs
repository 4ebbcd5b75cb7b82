//! Two-class synthetic recordings for exercising every pipeline without
//! clinical data.
//!
//! * Normal: a sinusoid (default 5 Hz, 50 µV) with random phase.
//! * Focal: a train of Gaussian spikes (default 150 µV, σ 10 ms) every
//!   0.25 s with ±10 % jitter on each interval.
//!
//! Both classes carry white Gaussian noise (default 10 µV) and a per-record
//! amplitude factor drawn from `[0.8, 1.2]`.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ingest::{write_record, Signal};
use crate::util::{derive_seed, seeded_rng};
use crate::{Class, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub records_per_class: usize,
    pub record_len: usize,
    pub sampling_rate_hz: f64,
    pub sine_hz: f64,
    pub sine_amplitude_uv: f64,
    pub spike_amplitude_uv: f64,
    pub spike_period_s: f64,
    pub spike_width_s: f64,
    pub noise_std_uv: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            records_per_class: 25,
            record_len: 2560,
            sampling_rate_hz: 512.0,
            sine_hz: 5.0,
            sine_amplitude_uv: 50.0,
            spike_amplitude_uv: 150.0,
            spike_period_s: 0.25,
            spike_width_s: 0.01,
            noise_std_uv: 10.0,
            seed: 2024,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sampling_rate_hz", self.sampling_rate_hz),
            ("sine_hz", self.sine_hz),
            ("spike_period_s", self.spike_period_s),
            ("spike_width_s", self.spike_width_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::InvalidParameter(format!("synth {name} must be positive")));
            }
        }
        if self.noise_std_uv < 0.0 || self.record_len < 2 || self.records_per_class == 0 {
            return Err(crate::Error::InvalidParameter(
                "synth noise must be non-negative, records non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// Record identifier, e.g. `focal_007`.
pub fn record_id(class: Class, index: usize) -> String {
    format!("{}_{index:03}", class.name())
}

/// One synthetic recording; independent of every other record's draws.
pub fn synth_record(class: Class, index: usize, config: &SynthConfig) -> Result<Signal> {
    config.validate()?;
    let mut rng = seeded_rng(derive_seed(config.seed, class.index() as u64), index as u64);
    let fs = config.sampling_rate_hz;
    let gain = rng.random_range(0.8..1.2);
    let mut samples = vec![0.0; config.record_len];
    match class {
        Class::Normal => {
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let w = std::f64::consts::TAU * config.sine_hz / fs;
            for (n, s) in samples.iter_mut().enumerate() {
                *s = gain * config.sine_amplitude_uv * (w * n as f64 + phase).sin();
            }
        }
        Class::Focal => {
            let period = config.spike_period_s * fs;
            let width = config.spike_width_s * fs;
            let reach = (4.0 * width).ceil() as i64;
            let mut centre = rng.random_range(0.0..period);
            while centre < config.record_len as f64 + reach as f64 {
                let c = centre.round() as i64;
                for n in (c - reach).max(0)..(c + reach + 1).min(config.record_len as i64) {
                    let d = (n as f64 - centre) / width;
                    samples[n as usize] += gain * config.spike_amplitude_uv * (-0.5 * d * d).exp();
                }
                centre += period * rng.random_range(0.9..1.1);
            }
        }
    }
    if config.noise_std_uv > 0.0 {
        let noise = Normal::new(0.0, config.noise_std_uv).expect("validated noise level");
        for s in &mut samples {
            *s += noise.sample(&mut rng);
        }
    }
    Signal::new(samples, fs, record_id(class, index))
}

/// `records_per_class` recordings of each class, normal first.
pub fn synth_dataset(config: &SynthConfig) -> Result<Vec<(Class, Signal)>> {
    let mut out = Vec::with_capacity(2 * config.records_per_class);
    for class in Class::ALL {
        for i in 0..config.records_per_class {
            out.push((class, synth_record(class, i, config)?));
        }
    }
    Ok(out)
}

/// Writes `<root>/<class>/<record_id>.txt` files, one sample per line.
pub fn write_dataset(root: impl AsRef<Path>, config: &SynthConfig) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    let mut paths = Vec::new();
    for (class, signal) in synth_dataset(config)? {
        let dir = root.join(class.name());
        std::fs::create_dir_all(&dir).map_err(|e| crate::Error::io(&dir, e))?;
        let path = dir.join(format!("{}.txt", signal.source_id));
        write_record(&path, &signal.samples)?;
        paths.push(path);
    }
    Ok(paths)
}
