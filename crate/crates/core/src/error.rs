use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the adaptive integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("finite-time blowup at t = {t}: state norm {norm:e} exceeds the escape bound")]
    Blowup { t: f64, norm: f64 },
    #[error("maximum number of steps ({steps}) reached at t = {t}")]
    MaxSteps { t: f64, steps: usize },
    #[error("integration aborted at t = {t}: {reason}")]
    Guard { t: f64, reason: String },
}

impl IntegrationError {
    /// Time at which the integration stopped.
    pub fn time(&self) -> f64 {
        match *self {
            IntegrationError::StepUnderflow { t, .. }
            | IntegrationError::NonFinite { t }
            | IntegrationError::Blowup { t, .. }
            | IntegrationError::MaxSteps { t, .. }
            | IntegrationError::Guard { t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical or numerical parameter violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A real power or a momentum was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Integration(#[from] IntegrationError),

    #[error("not oscillatory on this window: found {crossings} upward zero crossings, need at least 3")]
    NotOscillatory { crossings: usize },

    #[error("trajectory reached the map singularity z = 0 at t = {t}")]
    MapSingularity { t: f64 },

    #[error(
        "eigensolver unconverged for level {level}: coarse {coarse}, fine {fine}, error estimate {estimate:e}"
    )]
    Unconverged {
        level: usize,
        coarse: f64,
        fine: f64,
        estimate: f64,
    },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
}

impl Error {
    /// True when the error stems from bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Domain(_))
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
