use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("trace has not settled: {0}")]
    NotSettled(String),

    #[error("trace diverged")]
    Diverged,

    #[error("implicit solver failed at V = {voltage} V: {reason}")]
    SolverFailure { voltage: f64, reason: String },

    #[error("efficiency undefined for zero irradiance")]
    UndefinedEfficiency,

    #[error("incidence direction undefined: sun lies along the tracker normal")]
    UndefinedDirection,

    #[error("invalid duty cycle {0}: must lie in [0, 1)")]
    InvalidDuty(f64),

    #[error("singular linearization: operating level must be positive (got {0})")]
    SingularLinearization(f64),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad numbers rather than bad configuration.
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Io { .. })
    }
}
