use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller broke an operation's precondition (bad index, bad argument).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid configuration: {}", join_violations(.0))]
    Config(Vec<Violation>),

    /// Malformed or incomplete configuration file.
    #[error("config file: {0}")]
    ConfigFile(String),

    /// An energy denominator vanished (within the degeneracy tolerance).
    #[error("pole: {factor} is degenerate (value {value:e})")]
    Pole { factor: String, value: f64 },

    #[error("state leaks out of the R1 x R2 sector (weight {weight:e})")]
    SectorLeak { weight: f64 },

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("outside the perturbative regime: {0}")]
    Regime(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error: {0}")]
    Io(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
