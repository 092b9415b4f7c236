use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("length {0} must be even")]
    OddLength(usize),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid sampler configuration: {0}")]
    InvalidSampler(String),
    #[error("invalid wavelet configuration: {0}")]
    InvalidWavelet(String),
    #[error("invalid solver configuration: {0}")]
    InvalidSolver(String),
    #[error("pulse index {index} out of range (pulses = {pulses})")]
    PulseOutOfRange { index: usize, pulses: usize },
    #[error("fast path requires a periodic spreading spectrum")]
    NotPeriodic,
    #[error("reference grid is all zero")]
    ZeroReference,
    #[error("operator is numerically zero")]
    ZeroOperator,
    #[error("non-finite value at iteration {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
