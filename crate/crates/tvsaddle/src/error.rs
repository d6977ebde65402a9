//! Crate-wide error type.

use crate::config::ConfigErrors;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("validation: {0}")]
    Validation(String),

    /// A numerical routine could not finish at its required accuracy.
    #[error("solver: {0}")]
    Solver(String),

    /// Iterates left the finite range during a run.
    #[error("divergence at iteration {iteration}: {detail}")]
    Divergence { iteration: u64, detail: String },

    /// The requested metric needs an oracle the problem does not provide.
    #[error("metric unavailable: {0}")]
    MetricUnavailable(String),

    /// One or more problems in a configuration file.
    #[error("{0}")]
    Config(ConfigErrors),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a validation failure.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
