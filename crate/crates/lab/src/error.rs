use std::path::PathBuf;

use sgkink_core::SgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("referenced file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: SgError,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Attaches a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, SgError> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| LabError::Core {
            context: what.to_string(),
            source,
        })
    }
}
