use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants are grouped so the command-line front end can map them onto
/// its exit-code protocol (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceBound(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Exit code used by the `valtree` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. }
            | Error::UnknownNode(_)
            | Error::UnboundVariable(_)
            | Error::InvalidInput(_) => 2,
            Error::ResourceBound(_) => 3,
            Error::Precondition(_) | Error::Unsupported(_) => 4,
            Error::Invariant(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
