use thiserror::Error;

/// Errors raised by the toolkit's operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or indices that do not fit the game (profile length, player index, spec size).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numeric parameter outside its documented range (λ < 0, β ∉ (0,1], ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The operation is undefined for this input (negative payoff under a fractional power,
    /// regret of a single-strategy player).
    #[error("domain error: {0}")]
    Domain(String),

    /// A log-odds equation with a zero utility difference.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    /// A frequency of exactly 0 or 1 entered a log-odds computation.
    #[error("boundary frequency: {0}")]
    Boundary(String),

    /// Observed data is missing entries needed by the computation.
    #[error("missing data: {0}")]
    MissingData(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("malformed game document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        // Negated so that NaN fails every check.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($fmt)+)));
        }
    };
}

pub(crate) use ensure;
