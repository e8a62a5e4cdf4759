use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The step-halving check of a quadrature exceeded the requested tolerance.
    #[error(
        "accuracy error: step halving changed the result by {change:e} (tolerance {tolerance:e})"
    )]
    Accuracy { change: f64, tolerance: f64 },

    /// Quadrature configuration failed validation.
    #[error("invalid quadrature configuration: {0}")]
    Config(String),

    /// Physical parameters or grid descriptions that cannot be used.
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
