//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by data loading, model evaluation and sampling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid value in column `{column}`: {message}")]
    InvalidValue { column: String, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure at iteration {iteration}: {message}")]
    Numeric { iteration: usize, message: String },

    #[error("empty trace")]
    EmptyTrace,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn numeric(iteration: usize, message: impl Into<String>) -> Self {
        Error::Numeric {
            iteration,
            message: message.into(),
        }
    }

    pub fn invalid(column: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidValue {
            column: column.into(),
            message: message.into(),
        }
    }

    /// True for errors that indicate bad inputs rather than a numerical
    /// breakdown mid-run. Used by the CLI to pick exit codes.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numeric { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
