//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by model construction, numerics, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin value {value} at position {position}: expected +1 or -1")]
    InvalidSpin { position: usize, value: i8 },

    #[error("configuration length {len} outside supported range 1..={max}")]
    LengthOutOfRange { len: usize, max: usize },

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },

    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("KL divergence is infinite: p({index}) = {p} > 0 where q({index}) = 0")]
    DivergenceInfinite { index: usize, p: f64 },

    #[error("dense operator with {qubits} qubits exceeds the 2^{max} limit")]
    DimensionLimit { qubits: usize, max: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asym:.3e})")]
    NotSymmetric { max_asym: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    EigenNonConvergence { sweeps: usize, off: f64 },

    #[error("cannot condition on zero-probability visible configuration {index}")]
    ZeroProbabilityCondition { index: usize },

    #[error("numeric failure: {what}")]
    Numeric { what: String },

    #[error("invalid training config: {reason}")]
    InvalidConfig { reason: String },

    #[error("invalid dataset spec: {reason}")]
    InvalidDatasetSpec { reason: String },

    #[error("experiment failed: {reason}")]
    Experiment { reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
