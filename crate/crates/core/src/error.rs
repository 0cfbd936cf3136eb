use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("density must have at least one atom")]
    EmptyDensity,
    #[error("negative or non-finite mass {value} at atom {atom}")]
    NegativeMass { atom: usize, value: f64 },
    #[error("masses sum to {sum}, expected 1 within {tolerance:e}")]
    NotNormalized { sum: f64, tolerance: f64 },
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("infeasible hypercube: {0}")]
    InfeasibleSpec(String),
    #[error("(n, k) = ({n}, {k}) outside the regime: {reason}")]
    OutOfRegime { n: u64, k: u64, reason: String },
    #[error("interval [{start}, {start}+{len}) outside atoms 1..={k}")]
    OutOfRange { start: usize, len: usize, k: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("density is not non-increasing")]
    NotMonotone,
    #[error("density is not convex non-increasing")]
    NotConvex,
    #[error("estimate contains non-constant pieces")]
    NotPiecewiseConstant,
    #[error("problem too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("unknown estimator {0:?}")]
    UnknownEstimator(String),
    #[error("density family is empty")]
    EmptyFamily,
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
