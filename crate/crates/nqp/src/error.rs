//! Command-line error categories and their exit codes.

use nqp_core::NqpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 1,
            Kind::Data => 2,
            Kind::Numerical => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{msg}")]
pub struct CliError {
    pub kind: Kind,
    pub msg: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { kind: Kind::Usage, msg: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError { kind: Kind::Data, msg: msg.into() }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError { kind: Kind::Numerical, msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl From<NqpError> for CliError {
    fn from(e: NqpError) -> Self {
        let kind = match e {
            NqpError::InvalidParameter(_) => Kind::Usage,
            NqpError::InvalidData(_) => Kind::Data,
            NqpError::Numerical(_) => Kind::Numerical,
        };
        CliError { kind, msg: e.to_string() }
    }
}

/// Attaches a path to an IO failure, classified as a data error.
pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}
