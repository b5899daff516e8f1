use thiserror::Error;

/// Failure classes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested quantity does not exist in the current topological phase.
    #[error("phase error: {0}")]
    Phase(String),

    /// Mean-field gap closes on the integration circle.
    #[error("singular input: {0}")]
    SingularInput(String),

    /// Norm or trace drifted beyond tolerance during integration.
    #[error("step-size error: {0}")]
    StepSize(String),

    /// Bosonic truncation too small for the requested state.
    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
