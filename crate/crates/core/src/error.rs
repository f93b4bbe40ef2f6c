use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by indexing, the algorithms and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("claim list is empty")]
    EmptyDataset,

    #[error("duplicate claim id `{0}`")]
    DuplicateClaim(String),

    #[error("ground truth is empty")]
    EmptyGoldStandard,

    #[error("zero-norm vector in cosine similarity")]
    ZeroNorm,

    #[error("numeric failure in {algorithm}: {detail}")]
    NumericFailure {
        algorithm: &'static str,
        detail: String,
    },

    #[error("{0} sources exceed the direct-space limit of {limit} for MLE", limit = crate::probabilistic::MAX_DIRECT_SOURCES)]
    SourceCountExceeded(usize),

    #[error("value `{0}` is not atomic; reformat list values before running LTM")]
    RequiresReformat(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid experiment spec: {0}")]
    SpecError(String),

    #[error("{path}:{line}: {message}")]
    ParseError {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn numeric(algorithm: &'static str, detail: impl Into<String>) -> Self {
        Error::NumericFailure {
            algorithm,
            detail: detail.into(),
        }
    }
}
