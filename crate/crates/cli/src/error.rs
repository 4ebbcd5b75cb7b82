use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: gasf_eeg::Error,
    },
}

impl CliError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// The underlying library error of a failed stage.
    pub fn stage_source(&self) -> Option<&gasf_eeg::Error> {
        match self {
            CliError::Stage { source, .. } => Some(source),
            _ => None,
        }
    }
}
