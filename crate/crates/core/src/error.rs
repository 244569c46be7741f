use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A time outside the stored trajectory was requested.
    #[error("time {t} outside trajectory coverage [{start}, {end}]")]
    Coverage { t: f64, start: f64, end: f64 },

    #[error("implicit step at t = {t} did not converge in {iterations} iterations")]
    SolverFailure { t: f64, iterations: usize },

    /// `I - U2` is singular or too ill-conditioned to solve against.
    #[error("evolution assembly failed on window starting at {s}: reciprocal condition {rcond:e}")]
    AssemblyFailure { s: f64, rcond: f64 },

    #[error("non-finite entry in evolution matrix of window {window}")]
    NonFinite { window: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
