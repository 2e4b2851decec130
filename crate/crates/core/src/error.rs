use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: estimate {estimate:e}, residual error {residual:e}")]
    Quadrature { estimate: f64, residual: f64 },

    #[error("moment of order {order} is not finite for this law")]
    UnsupportedMoment { order: u32 },

    #[error("correlation structure is not concave: a[{i}][{j}] = {value:e}")]
    ConcavityViolation { i: usize, j: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "simulation window {required:e} exceeds the configured maximum {max:e}; raise the window limit"
    )]
    WindowTooLarge { required: f64, max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn ensure_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be nonnegative and finite, got {value}")))
    }
}
