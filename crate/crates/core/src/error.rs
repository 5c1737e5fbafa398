use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid channel path: {0}")]
    InvalidPath(String),

    #[error("delay of {delay} bins exceeds the frame ({limit} bins)")]
    DelayExceedsFrame { delay: f64, limit: usize },

    #[error("search space of {bits} bits exceeds the enumeration limit of {limit} bits")]
    SearchSpaceTooLarge { bits: usize, limit: usize },

    #[error("regularized system is singular (noise variance {n0} with a rank-deficient channel)")]
    SingularSystem { n0: f64 },

    #[error("invalid parameter `{field}`: {msg}")]
    Validation { field: String, msg: String },

    #[error("failed to parse {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
