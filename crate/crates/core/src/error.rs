use thiserror::Error;

/// Errors produced by the simulator and the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scenario or parameter value is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A slot or state transition broke a model invariant.
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// Vector/matrix dimensions do not line up, or entries are out of range.
    #[error("shape error: {0}")]
    Shape(String),

    /// Arguments fall outside the domain where an expression is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive enumeration would exceed the configured budget.
    #[error("instance too large to enumerate: {outcomes} joint outcomes exceed limit {limit}")]
    Tractability { outcomes: f64, limit: f64 },

    /// The SU-information oracle could not supply what a policy needs.
    #[error("oracle error: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
