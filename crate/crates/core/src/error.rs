use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("numerical failure at t = {time}: {reason}")]
    NumericalFailure { time: f64, reason: String },

    #[error("state has (near) zero trace; no branch can be formed")]
    EmptyState,

    #[error("null-result probability underflowed after {step} measurements")]
    SurvivalExtinction { step: usize },

    #[error("horizon t_max = {t_max} exceeds reservoir recurrence time {recurrence}")]
    RecurrenceViolation { t_max: f64, recurrence: f64 },

    #[error("integrator failure at t = {time}: norm drift {drift:.3e}")]
    IntegratorFailure { time: f64, drift: f64 },

    #[error("curves are not on a shared grid: {0}")]
    Alignment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure { .. }
                | Error::EmptyState
                | Error::SurvivalExtinction { .. }
                | Error::RecurrenceViolation { .. }
                | Error::IntegratorFailure { .. }
        )
    }
}
