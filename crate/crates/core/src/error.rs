use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, the closed-form estimators, the oracle and the sweep driver.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Closed-form paths are only defined for a vanishing relative phase.
    #[error("closed-form evaluation requires phi = 0 (got {0})")]
    NonzeroPhase(f64),

    /// The requested concurrence exceeds what the separation allows.
    #[error("concurrence {requested} is out of reach at s = {s}: C_max = {c_max}")]
    OutOfReach { requested: f64, s: f64, c_max: f64 },

    /// Eigenvector |e1> (and everything built on it) is undefined at zero separation.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// A pure-state family handed to the Fisher information routine was not normalized.
    #[error("state family is not normalized: <psi|psi> = {0}")]
    NotNormalized(f64),

    /// Oracle grid or Hermite-Gauss truncation is not adequate for the request.
    #[error("oracle configuration: {0}")]
    Config(String),

    /// Invalid sweep specification or CLI usage.
    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
