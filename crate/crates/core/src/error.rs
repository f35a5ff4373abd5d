use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// A gradient or parameter tensor contained NaN or infinity.
    NonFinite { tensor: &'static str },
    /// A covariance matrix could not be factorized.
    Singular(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite { tensor } => {
                write!(f, "non-finite values in tensor `{tensor}`; training diverged")
            }
            Error::Singular(msg) => write!(f, "singular matrix: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
