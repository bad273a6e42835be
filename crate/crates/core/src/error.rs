use alloc::string::String;

/// Errors raised anywhere in the pipeline.
///
/// The variants map onto the command-line exit codes: parameter errors are
/// usage errors, data errors are data errors and numerical errors are
/// numerical failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NqpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, NqpError>;

impl NqpError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        NqpError::InvalidParameter(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        NqpError::InvalidData(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        NqpError::Numerical(msg.into())
    }
}
