use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("solver failed at s = {s}: {source}")]
    AtSchedulePoint {
        s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate trace: {0}")]
    Degenerate(String),

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("run failed (J = {coupling}, seed = {seed}, scheme = {scheme}, tau = {tau}): {source}")]
    Run {
        coupling: f64,
        seed: u64,
        scheme: String,
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Capacity(_) => "capacity",
            Error::Convergence { .. } => "convergence",
            Error::AtSchedulePoint { .. } => "solver",
            Error::Degenerate(_) => "degenerate",
            Error::Parse { .. } => "parse",
            Error::Run { .. } => "run",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Config(_) => "config",
            Error::Invariant(_) => "invariant",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
