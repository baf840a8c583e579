use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] nhlab_core::Error),

    #[error("unknown scenario template `{0}`")]
    UnknownTemplate(String),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        let key = if key.is_empty() || key == "." { "<root>" } else { key };
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
