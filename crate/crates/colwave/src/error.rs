use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument to a library call.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A mesh/grid compatibility rule was violated.
    #[error("mesh incompatible: {0}")]
    Mesh(String),

    /// A scenario configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical breakdown during a computation (overflow, degenerate
    /// Jacobian, CFL blow-up).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
