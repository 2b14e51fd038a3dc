use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix side {side} exceeds the diagonal-analysis cap of {cap}")]
    DimensionTooLarge { side: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coordinate descent did not converge after {iterations} sweeps (kkt residual {kkt_residual:e})")]
    NotConverged {
        iterations: usize,
        kkt_residual: f64,
    },

    #[error("bound hypotheses not satisfied: {0}")]
    Unverifiable(String),

    #[error("at least two replications are required, got {0}")]
    TooFewReplications(usize),

    #[error("(d = {d}, s = {s}) is outside 3 <= s <= (d + 2) / 3")]
    OutOfRegime { d: usize, s: usize },

    #[error(
        "packing construction stopped at {built} of {target} vectors after {attempts} candidates"
    )]
    PackingFailed {
        built: usize,
        target: usize,
        attempts: usize,
    },

    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
