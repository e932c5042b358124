use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside an operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A JSON document that parses but violates an invariant, or fails to parse.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    /// A computation that produced a non-finite value or failed a residual check.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: msg.into(),
        }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
