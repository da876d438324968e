use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("term {0} is not part of the index set")]
    UnknownTerm(String),

    #[error("bandwidth schedule has no entry for interaction order {0}")]
    MissingOrder(usize),

    #[error("dense materialization of {rows}x{cols} exceeds the size guard of {limit} entries")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("approximant has zero variance; sensitivity indices are undefined")]
    ZeroVariance,

    #[error("solver produced a non-finite value at iteration {0}")]
    NonFinite(usize),

    #[error("column `{0}` has zero standard deviation")]
    ZeroStd(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("dataset error: {0}")]
    Data(String),

    #[error("run {repetition}/{fold} failed: {source}")]
    Run {
        repetition: usize,
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
