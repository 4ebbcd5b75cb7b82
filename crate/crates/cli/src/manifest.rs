use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Pipeline, RunConfig};
use gasf_eeg::{derive_seed, Class};

/// Per-stage seeds derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub split: u64,
    pub cnn_init: u64,
    pub cnn_train: u64,
    pub swarm: u64,
    pub ann_init: u64,
    pub ann_train: u64,
}

impl Seeds {
    pub fn derive(master: u64) -> Self {
        Seeds {
            master,
            split: derive_seed(master, 1),
            cnn_init: derive_seed(master, 2),
            cnn_train: derive_seed(master, 3),
            swarm: derive_seed(master, 4),
            ann_init: derive_seed(master, 5),
            ann_train: derive_seed(master, 6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub class: Class,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    /// Milliseconds since the Unix epoch when the stage began.
    pub started_unix_ms: u128,
    pub seconds: f64,
}

/// Everything needed to re-execute a run and locate what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub pipeline: Pipeline,
    pub config: RunConfig,
    pub seeds: Seeds,
    pub inputs: Vec<InputDigest>,
    pub artifacts: BTreeMap<String, PathBuf>,
    pub stages: Vec<StageTiming>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Copy with wall-clock fields zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut m = self.clone();
        for s in &mut m.stages {
            s.started_unix_ms = 0;
            s.seconds = 0.0;
        }
        m
    }
}

pub fn sha256_file(path: &Path) -> Result<String, gasf_eeg::Error> {
    let mut file = std::fs::File::open(path).map_err(|e| gasf_eeg::Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| gasf_eeg::Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
