use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("stick fraction {value} at position {index} is outside [0, 1]")]
    StickOutOfRange { index: usize, value: f64 },

    #[error("last stick fraction must be pinned to 1, got {0}")]
    UnpinnedStick(f64),

    #[error("enumeration needs up to {paths} paths, above the limit of {limit}")]
    EnumerationTooLarge { paths: u128, limit: u128 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("filtered probabilities for unit {unit} vanish at period {period}: data impossible under every cluster")]
    FilterUnderflow { unit: usize, period: usize },

    #[error("no posterior draws available")]
    EmptyDraws,

    #[error("{0}")]
    Query(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
