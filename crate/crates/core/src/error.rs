use thiserror::Error;

/// Errors raised by the simulator's numerical and decision layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The closed-form focusing gain is undefined when the observation depth
    /// equals the focal depth.
    #[error("singular focus: observation depth equals focal depth; use the integral form")]
    SingularFocus,

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("numerical failure in {operation}: achieved error estimate {achieved_error:e}")]
    NumericalFailure {
        operation: &'static str,
        achieved_error: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
