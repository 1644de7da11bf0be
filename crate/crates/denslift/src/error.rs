use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("symbol `{0}` is already registered")]
    DuplicateSymbol(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("order of the zero operator is undefined")]
    ZeroOperator,
    #[error("operator contains the weight operator L")]
    HasWeightOperator,
    #[error("exceptional weight {0}")]
    ExceptionalWeight(String),
    #[error("operator order {found} exceeds the allowed {allowed}")]
    OrderTooHigh { found: usize, allowed: usize },
    #[error("coefficient {index} has order {found}, allowed at most {allowed}")]
    OrderViolation { index: usize, found: usize, allowed: usize },
    #[error("operator does not annihilate constants")]
    NotNormalized,
    #[error("dimension {found} too small, need at least {needed}")]
    DimensionTooSmall { found: usize, needed: usize },
    #[error("operation requires dimension 1, got {0}")]
    DimensionNotOne(usize),
    #[error("bad polynomial: {0}")]
    BadPolynomial(String),
    #[error("wrong number of parameters: {0}")]
    ParameterCount(String),
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("index {index} out of range 1..={dim} at byte {offset}")]
    IndexOutOfRange { index: usize, dim: usize, offset: usize },
    #[error("division by a non-constant or zero expression at byte {0}")]
    BadDivision(usize),
    #[error("operator is not divisible by (L - l0)")]
    NotDivisible,
    #[error("invalid JSON operator: {0}")]
    Json(String),
}

impl Error {
    /// Parse-level failures, as opposed to domain errors raised by the calculus.
    pub fn is_syntax(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::IndexOutOfRange { .. } | Error::BadDivision(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
