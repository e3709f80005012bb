//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),
    /// Input lies outside the domain where the requested quantity exists.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to reach its target accuracy.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Input is not of the structural class the method assumes.
    #[error("structure error: {0}")]
    Structure(String),
    /// Leading symbol is not positive definite.
    #[error("ellipticity error: {0}")]
    Ellipticity(String),
    /// Requested work exceeds the configured budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// An internal cross-check disagreed with a closed form.
    #[error("consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        validation(format!("{name} must be positive and finite, got {value}"))
    }
}
