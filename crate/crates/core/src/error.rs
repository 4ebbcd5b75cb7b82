use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no samples")]
    NoSamples { path: PathBuf },

    #[error("parse error at row {row}, column {column}: `{token}` is not a finite number")]
    Parse { row: usize, column: usize, token: String },

    #[error("ragged input at row {row}: expected {expected} columns, got {got}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("channel index {channel} out of range for {columns} column(s)")]
    ChannelOutOfRange { channel: usize, columns: usize },

    #[error("signal of length {len} is shorter than epoch length {epoch_len}")]
    SignalTooShort { len: usize, epoch_len: usize },

    #[error("class {class} has {count} epoch(s); at least {required} required")]
    InsufficientClass {
        class: crate::Class,
        count: usize,
        required: usize,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("value {value} outside [-1, 1]")]
    OutOfRange { value: f64 },

    #[error("unknown colormap `{0}`")]
    UnknownColormap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
