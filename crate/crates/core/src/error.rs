use thiserror::Error;

/// Errors raised by the toolkit's operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape precondition violated: {0}")]
    Shape(String),

    #[error("newton iteration failed to converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("point is not on the variety (residual {0:e})")]
    NotOnVariety(f64),

    #[error("degenerate chart: {0}")]
    DegenerateChart(String),

    #[error("sublattice basis is linearly dependent")]
    DependentColumns,

    #[error("restricted form is not negative definite")]
    NotNegativeDefinite,

    #[error("vector has non-positive square {0}")]
    NonPositiveSquare(f64),

    #[error("rate {0} is critical")]
    CriticalRate(String),

    #[error("signature plus Euler characteristic must be even, got {0}")]
    Parity(i64),

    #[error("spectrum has no negative rate")]
    NoNegativeRate,

    #[error("degenerate frame")]
    DegenerateFrame,

    #[error("singular point of the fibration")]
    SingularPoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contraction family member at parameter {0} failed to converge")]
    FamilyDivergence(f64),

    #[error("gluing matrix must have determinant +-1, got {0}")]
    NotUnimodular(i64),
}

pub type Result<T> = std::result::Result<T, Error>;
