use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("visibility error: {0}")]
    Visibility(String),

    /// No end-to-end route exists at the given time.
    #[error("no route at t={t}s: {reason}")]
    NoRoute { t: f64, reason: String },

    /// The interval cover cannot be completed; `t` is the earliest uncovered
    /// sample time.
    #[error("cover infeasible: no access pair covers t={t}s")]
    InfeasibleCover { t: f64 },

    #[error("cover error: {0}")]
    Cover(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Scenario file problem, with a 1-based line number where applicable.
    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
