use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed layer: {0}")]
    MalformedLayer(String),

    #[error("output state is not a computational basis state (qubit {qubit} is random)")]
    NonDeterministicOutput { qubit: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid sampler: {0}")]
    InvalidSampler(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("error model does not cover {0}")]
    ModelCoverage(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("oracle size cap exceeded: {what} supports n <= {cap}, got {n}")]
    OracleCap { what: &'static str, cap: usize, n: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
