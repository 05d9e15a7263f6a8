use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke a structural precondition (mismatched meshes, bad indices).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested truth oracle has no closed form for this population.
    #[error("no closed-form {what} for {population}")]
    UnsupportedClosedForm {
        what: &'static str,
        population: String,
    },

    /// An iterative routine did not converge.
    #[error("{0} failed to converge")]
    Convergence(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the `ecfr` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnsupportedClosedForm { .. } => 2,
            Error::Domain(_) | Error::Contract(_) | Error::Convergence(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
