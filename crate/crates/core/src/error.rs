use thiserror::Error;

/// Errors raised by the packet, coefficient, and estimator layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A closed-form shift was requested outside the region where its
    /// first-order expansion holds.
    #[error("{formula} is not valid here: {reason}")]
    Validity {
        formula: &'static str,
        reason: String,
    },

    /// The first-order expansion of the reflection coefficient diverges
    /// (critical incidence); use the mean-value path instead.
    #[error("singular expansion: {0}")]
    SingularExpansion(String),

    /// Doubling the quadrature nodes moved the result by more than the
    /// requested tolerance.
    #[error("quadrature did not converge: relative change {achieved:.3e} exceeds {tolerance:.3e}")]
    NonConvergence { achieved: f64, tolerance: f64 },

    /// Branch points could not be bracketed by panel boundaries.
    #[error("panel splitting failed: {0}")]
    PanelSplit(String),

    /// The sampled window does not contain the feature being estimated.
    #[error("window error: {0}")]
    Window(String),

    /// The profile carries no usable signal (flat or zero).
    #[error("degenerate profile: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
