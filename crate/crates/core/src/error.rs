use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive-definite")]
    NotPositiveDefinite,
    #[error("map is not injective (rank {rank} < {cols} columns)")]
    NotInjective { rank: usize, cols: usize },
    #[error("broken chain at map {index}: {reason}")]
    BrokenChain { index: usize, reason: String },
    #[error("interpretation map annihilates the vector")]
    ZeroImage,
    #[error("valuation of kind {0} is not supported here")]
    UnsupportedValuation(&'static str),
    #[error("unknown origin agent `{0}`")]
    UnknownOrigin(String),
    #[error("origin agent `{0}` holds no nonzero representation")]
    OriginHoldsNothing(String),
    #[error("unknown leader agent `{0}`")]
    UnknownLeader(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("probability {0} is outside (0, 1]")]
    BadProbability(f64),
    #[error("coordinate index {index} is invalid for dimension {dim}")]
    BadIndex { index: usize, dim: usize },
    #[error("missing interpretation map {from} -> {to}")]
    MissingMap { from: String, to: String },
    #[error("no candidates")]
    NoCandidates,
    #[error("axis label `{0}` already exists in the value space")]
    DuplicateAxisLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
}
