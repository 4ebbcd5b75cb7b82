//! Focal EEG classification from time-series images.
//!
//! Fixed-length EEG epochs are encoded as Gramian Angular Summation Field
//! (GASF) images and classified by a small convolutional network built from
//! scratch. A second path computes four time-frequency spectra per epoch,
//! extracts GLCM texture statistics from them, selects features with a
//! binary particle swarm and classifies with a dense network.
//!
//! ```text
//! record.txt ── ingest ──> epochs ──┬── encode (GASF → RGB → resize) ──> nn (CNN)
//!                                   │
//!                                   └── tfr (ST, WVD, SET, STFT) ── texture ── select (PSO) ──> nn (ANN)
//!                                                                             │
//!                                                            eval (P/R/F1, ROC/AUC)
//! ```

pub mod encode;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod nn;
pub mod select;
pub mod synth;
pub mod texture;
pub mod tfr;

mod class;
mod fft;
mod util;

pub use class::Class;
pub use error::{Error, Result};
pub use util::derive_seed;
