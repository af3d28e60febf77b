use thiserror::Error;

/// Errors raised by the outage estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied value violates its documented range.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An argument lies outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computed probability fell outside [-1e-9, 1 + 1e-9] or was not finite.
    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: error estimate {error_estimate:e} after {subdivisions} subdivisions")]
    NonConvergence { error_estimate: f64, subdivisions: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
