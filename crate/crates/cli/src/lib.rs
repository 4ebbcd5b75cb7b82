//! Configuration, orchestration and run manifests for the `gasf-eeg`
//! command-line tool.

pub mod config;
mod error;
pub mod manifest;
pub mod pipeline;

pub use config::RunConfig;
pub use error::CliError;
pub use manifest::{RunManifest, Seeds};
pub use pipeline::{run_pipeline, Pipeline, RunReport};
