use thiserror::Error;

/// Errors raised by the numerical routines and the command-line driver.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong dimension, asymmetric matrix, unphysical state.
    #[error("validation error: {0}")]
    Validation(String),

    /// A scalar parameter lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Noise of the channel is not of the isotropic thermal-like form.
    #[error("shape error: {0}")]
    Shape(String),

    /// Root finding was given an interval without a sign change.
    #[error("bracketing error: {0}")]
    Bracket(String),

    /// An iterative solver failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

/// Fails with a domain error unless `x` is finite and `x >= 0`.
pub(crate) fn ensure_nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and >= 0, got {x}")))
    }
}

/// Fails with a domain error unless `x` lies in `[0, 1]`.
pub(crate) fn ensure_unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1], got {x}")))
    }
}

impl Error {
    /// Process exit status for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Domain(_) => 2,
            Error::Shape(_) | Error::Bracket(_) | Error::Numeric(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
