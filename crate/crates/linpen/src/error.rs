use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: linpen_core::Error },
    #[error("config: {field}: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Core(#[from] linpen_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: schema mismatch: {message}")]
    Schema { path: PathBuf, message: String },
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config { field: field.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// True for errors caused by the configuration or command line rather than
    /// by an individual work item.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
