//! Run configuration. Every section and field has a default, so an empty
//! file is a valid configuration.
//!
//! ```toml
//! seed = 7
//! out_dir = "runs/demo"
//! threads = 1
//!
//! [data]
//! root = "data/synth"
//! delimiter = ","
//! channel = 0
//! sampling_rate_hz = 512.0
//! epoch_len = 256
//! split_fraction = 0.8
//! # max_epochs_per_class = 390
//!
//! [encode]
//! scaling = "unit_signed"
//! colormap = "jet"
//! image_size = 64
//! write_png = true
//!
//! [cnn]
//! scale = 0.25
//! [cnn.train]
//! epochs = 30
//! batch_size = 16
//! learning_rate = 0.001
//! optimizer = "adam"
//! [cnn.augment]
//! rotation_deg = 5.0
//! shift_px = 2
//! shear = 0.05
//!
//! [features]           # transform, GLCM and feature-source settings
//! [ann]
//! hidden = [16, 8]
//! use_selection = true
//! [swarm]
//! particles = 20
//! iterations = 50
//! [eval]
//! checkpoint = "runs/demo/checkpoint.bin"
//! ```

use std::path::{Path, PathBuf};

use gasf_eeg::encode::{Colormap, ScalingMode, DEFAULT_COLORMAP};
use gasf_eeg::ingest::EPOCH_LEN;
use gasf_eeg::nn::{OptimizerKind, TrainConfig};
use gasf_eeg::select::SwarmConfig;
use gasf_eeg::synth::SynthConfig;
use gasf_eeg::texture::FeatureSettings;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the data root when neither the command line
/// nor the config file does.
pub const DATA_ROOT_ENV: &str = "GASF_EEG_DATA";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every stochastic stage derives its own seed from it.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub data: DataConfig,
    pub encode: EncodeConfig,
    pub cnn: CnnConfig,
    pub features: FeatureSettings,
    pub ann: AnnConfig,
    pub swarm: SwarmConfig,
    pub synth: SynthConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            threads: 0,
            data: DataConfig::default(),
            encode: EncodeConfig::default(),
            cnn: CnnConfig::default(),
            features: FeatureSettings::default(),
            ann: AnnConfig::default(),
            swarm: SwarmConfig::default(),
            synth: SynthConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Either `normal/` and `focal/` subdirectories, or a flat directory of
    /// `Data_N_*` / `Data_F_*` files.
    pub root: Option<PathBuf>,
    pub delimiter: char,
    pub channel: usize,
    pub sampling_rate_hz: f64,
    pub epoch_len: usize,
    pub split_fraction: f64,
    /// Keeps the first epochs of each class, in file order.
    pub max_epochs_per_class: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            root: None,
            delimiter: ',',
            channel: 0,
            sampling_rate_hz: 512.0,
            epoch_len: EPOCH_LEN,
            split_fraction: 0.8,
            max_epochs_per_class: None,
        }
    }
}

impl DataConfig {
    /// Configured root, else the environment variable, else `data`.
    pub fn resolved_root(&self) -> PathBuf {
        self.root
            .clone()
            .or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeConfig {
    pub scaling: ScalingMode,
    pub colormap: String,
    /// Side of the square network input the GASF image is resized to.
    pub image_size: usize,
    pub write_png: bool,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        EncodeConfig {
            scaling: ScalingMode::UnitSigned,
            colormap: DEFAULT_COLORMAP.to_string(),
            image_size: 64,
            write_png: true,
        }
    }
}

/// Uniform ranges the per-sample augmentation draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentRanges {
    pub rotation_deg: f64,
    pub shift_px: i64,
    pub shear: f64,
}

impl Default for AugmentRanges {
    fn default() -> Self {
        AugmentRanges {
            rotation_deg: 5.0,
            shift_px: 2,
            shear: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnConfig {
    pub scale: f64,
    pub train: TrainConfig,
    pub augment: AugmentRanges,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            scale: 0.25,
            train: TrainConfig {
                epochs: 30,
                batch_size: 16,
                learning_rate: 1e-3,
                optimizer: OptimizerKind::Adam,
                augmentation: true,
                ..TrainConfig::default()
            },
            augment: AugmentRanges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnConfig {
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    /// Train on the swarm-selected columns instead of all ten.
    pub use_selection: bool,
}

impl Default for AnnConfig {
    fn default() -> Self {
        AnnConfig {
            hidden: vec![16, 8],
            train: TrainConfig {
                epochs: 200,
                batch_size: 16,
                learning_rate: 1e-2,
                optimizer: OptimizerKind::Adam,
                monitor_epochs: 10,
                ..TrainConfig::default()
            },
            use_selection: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub checkpoint: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigFile {
            path: PathBuf::from("<inline>"),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks every field; the error names the first offending one.
    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.data;
        if !d.delimiter.is_ascii() || d.delimiter == '\n' || d.delimiter == '\r' {
            return Err(CliError::config("data.delimiter", "must be a single ASCII character other than a newline"));
        }
        if !(d.sampling_rate_hz > 0.0 && d.sampling_rate_hz.is_finite()) {
            return Err(CliError::config("data.sampling_rate_hz", "must be positive"));
        }
        if d.epoch_len < 2 {
            return Err(CliError::config("data.epoch_len", "must be at least 2"));
        }
        if !(d.split_fraction > 0.0 && d.split_fraction < 1.0) {
            return Err(CliError::config("data.split_fraction", "must lie strictly between 0 and 1"));
        }
        if d.max_epochs_per_class == Some(0) {
            return Err(CliError::config("data.max_epochs_per_class", "must be positive"));
        }
        if Colormap::builtin(&self.encode.colormap).is_err() {
            let known: Vec<_> = Colormap::names().collect();
            return Err(CliError::config(
                "encode.colormap",
                format!("unknown colormap `{}` (known: {})", self.encode.colormap, known.join(", ")),
            ));
        }
        if self.encode.image_size < 16 {
            return Err(CliError::config("encode.image_size", "must be at least 16"));
        }
        if !(self.cnn.scale > 0.0 && self.cnn.scale <= 1.0) {
            return Err(CliError::config("cnn.scale", "must lie in (0, 1]"));
        }
        let a = &self.cnn.augment;
        if !(a.rotation_deg >= 0.0 && a.shear >= 0.0 && a.shift_px >= 0) {
            return Err(CliError::config("cnn.augment", "ranges must be non-negative"));
        }
        self.cnn.train.validate().map_err(|e| CliError::config("cnn.train", e.to_string()))?;
        self.ann.train.validate().map_err(|e| CliError::config("ann.train", e.to_string()))?;
        if self.ann.hidden.is_empty() || self.ann.hidden.contains(&0) {
            return Err(CliError::config("ann.hidden", "needs at least one non-zero width"));
        }
        if self.features.glcm.levels < 2 || self.features.glcm.levels > 256 {
            return Err(CliError::config("features.glcm.levels", "must lie in 2..=256"));
        }
        self.swarm.validate().map_err(|e| CliError::config("swarm", e.to_string()))?;
        self.synth.validate().map_err(|e| CliError::config("synth", e.to_string()))?;
        Ok(())
    }
}
