//! Binary checkpoint format:
//!
//! ```text
//! b"GASFCKPT" | version: u8 | header_len: u32 LE | header: JSON | blob
//! ```
//!
//! The blob holds every stored tensor in layer order (weights, bias, then
//! BatchNorm gamma, beta, running mean, running variance) as little-endian
//! `f32` (or `f64`, as named by the header's `weight_dtype`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EpochRecord, LayerSpec, Network, Precision};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"GASFCKPT";
pub const CHECKPOINT_VERSION: u8 = 1;

/// Best-validation snapshot and the history of the run that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    /// Zero-based epoch of the snapshot.
    pub epoch: usize,
    pub val_accuracy: f64,
    pub history: Vec<EpochRecord>,
    pub seed: u64,
    /// Free-form data carried alongside the weights (pipeline settings,
    /// feature masks, normalization constants).
    pub metadata: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct Header {
    layers: Vec<LayerSpec>,
    input_shape: Vec<usize>,
    shapes: Vec<Vec<usize>>,
    epoch: usize,
    val_accuracy: f64,
    seed: u64,
    init_seed: u64,
    precision: Precision,
    weight_dtype: String,
    tensor_lengths: Vec<usize>,
    history: Vec<EpochRecord>,
    metadata: serde_json::Value,
}

impl Checkpoint {
    /// Best validation accuracy in the history.
    pub fn best_history_accuracy(&self) -> Option<f64> {
        self.history.iter().map(|r| r.val_accuracy).reduce(f64::max)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let net = &self.network;
        let state = net.state();
        let dtype = match net.precision() {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        };
        let header = Header {
            layers: net.specs().to_vec(),
            input_shape: net.input_shape().to_vec(),
            shapes: net.shapes().to_vec(),
            epoch: self.epoch,
            val_accuracy: self.val_accuracy,
            seed: self.seed,
            init_seed: net.seed(),
            precision: net.precision(),
            weight_dtype: dtype.to_string(),
            tensor_lengths: state.iter().map(|t| t.len()).collect(),
            history: self.history.clone(),
            metadata: self.metadata.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(13 + json.len() + net.parameter_count() * 4);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.push(CHECKPOINT_VERSION);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for t in state {
            for &v in t {
                match net.precision() {
                    Precision::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                    Precision::F64 => out.extend_from_slice(&v.to_le_bytes()),
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < 13 || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(bad("missing magic string"));
        }
        if bytes[8] != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", bytes[8])));
        }
        let header_len = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
        let json = bytes.get(13..13 + header_len).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(json)?;
        let width = match header.weight_dtype.as_str() {
            "f32" => 4,
            "f64" => 8,
            other => return Err(Error::Checkpoint(format!("unknown weight dtype {other}"))),
        };
        let mut network =
            Network::with_precision(header.layers, header.input_shape, header.init_seed, header.precision)?;
        if network.shapes() != header.shapes {
            return Err(bad("stored shapes disagree with the layer specs"));
        }
        let mut blob = &bytes[13 + header_len..];
        let expected: usize = header.tensor_lengths.iter().sum::<usize>() * width;
        if blob.len() != expected {
            return Err(Error::Checkpoint(format!(
                "weight blob has {} bytes, expected {expected}",
                blob.len()
            )));
        }
        let mut state = network.state_mut();
        if state.len() != header.tensor_lengths.len() {
            return Err(bad("tensor count disagrees with the layer specs"));
        }
        for (t, &len) in state.iter_mut().zip(&header.tensor_lengths) {
            if t.len() != len {
                return Err(bad("tensor length disagrees with the layer specs"));
            }
            for v in t.iter_mut() {
                *v = if width == 4 {
                    f32::from_le_bytes(blob[..4].try_into().unwrap()) as f64
                } else {
                    f64::from_le_bytes(blob[..8].try_into().unwrap())
                };
                blob = &blob[width..];
            }
        }
        Ok(Checkpoint {
            network,
            epoch: header.epoch,
            val_accuracy: header.val_accuracy,
            history: header.history,
            seed: header.seed,
            metadata: header.metadata,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
