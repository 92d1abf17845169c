use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed dataset: {0}")]
    Format(String),

    #[error("invalid dataset: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("component count {k} out of range 1..={max}")]
    ComponentRange { k: usize, max: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("covariance is singular after {escalations} ridge escalations (ridge {ridge:e})")]
    Singular { escalations: u32, ridge: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot compare reports: {0}")]
    Mismatch(String),

    #[error("render error: {0}")]
    Render(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure came from the environment rather than the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
