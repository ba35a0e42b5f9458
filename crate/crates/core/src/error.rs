use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("time {time} does not belong to regression block {block}")]
    BlockTimeMismatch { block: usize, time: f64 },

    #[error("degenerate regression in block {block}: matrix not positive definite after ridge")]
    DegenerateRegression { block: usize },

    #[error("degenerate regression at exercise date {date}")]
    DegenerateDate { date: usize },

    #[error("no regression block received any weight; nothing to estimate")]
    EmptyRegression,

    #[error("coefficient set does not match basis: {0}")]
    BasisMismatch(String),

    #[error("PSOR did not converge at time step {step}")]
    PsorNotConverged { step: usize },

    #[error("schedule date {time} is not on the finite-difference time grid")]
    ScheduleOffGrid { time: f64 },

    #[error("rate estimate needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("I/O: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::BasisMismatch(_)
                | Error::ScheduleOffGrid { .. }
                | Error::TooFewPoints(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
