use thiserror::Error;

/// Errors raised by the probability, region and bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet must have at least one symbol")]
    EmptyAlphabet,

    #[error("alphabet labels must be distinct and match the size ({0})")]
    BadLabels(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),

    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("variable set must not be empty")]
    EmptyVariableSet,

    #[error("table has {got} entries, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("entry {index} is negative or not finite ({value})")]
    InvalidEntry { index: usize, value: f64 },

    #[error("table sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("row {row} sums to {sum}, expected 1")]
    RowNotNormalized { row: usize, sum: f64 },

    #[error("table would have {size} entries, over the cap of {cap}")]
    TableCapExceeded { size: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scale factor must be nonnegative, got {0}")]
    NegativeScale(f64),

    #[error("enumeration of {count} candidates exceeds the cap of {cap}")]
    EnumerationCapExceeded { count: u128, cap: u128 },

    #[error("grid resolution must be at least 2, got {0}")]
    BadGrid(usize),

    #[error("cut index {k} out of range 1..={max}")]
    BadCutIndex { k: usize, max: usize },

    #[error("point is not contained in the region")]
    NotContained,

    #[error("party {party}: expected distortion {actual} exceeds the allowed {allowed}")]
    DistortionViolated { party: usize, actual: f64, allowed: f64 },

    #[error("party {0}: distortion matrix has no nonzero off-diagonal entry")]
    DegenerateDistortion(usize),

    #[error("invalid specification: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
