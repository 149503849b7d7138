use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the farm-layout toolkit.
#[derive(Debug, Error)]
pub enum FarmError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("layout initialization failed: {0}")]
    InitializationFailure(String),

    #[error("optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: at `{field}`: {message}")]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, FarmError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FarmError {
    FarmError::InvalidInput(msg.into())
}
