use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates one of its construction invariants.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The requested quantity is undefined for the given inputs.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("steady-state solver did not converge after {iterations} iterations (residual {residual:e})")]
    SteadyState { residual: f64, iterations: usize },

    #[error("linear system is singular at omega = {omega:e} rad/s (condition number {condition:e})")]
    Singular { omega: f64, condition: f64 },

    #[error("objective is not finite at {at:?}")]
    NonFinite { at: Vec<f64> },

    #[error("engine `{engine}` cannot evaluate this sweep: {reason}")]
    EngineMismatch { engine: String, reason: String },

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data file {}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SteadyState { .. } | Error::Singular { .. } | Error::NonFinite { .. }
        )
    }
}
