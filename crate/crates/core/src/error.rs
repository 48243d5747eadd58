use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step limit of {steps} exceeded at t = {t}")]
    StepLimit { t: f64, steps: u64 },

    #[error("norm drift {drift:e} exceeds tolerance at t = {t}")]
    NormDrift { t: f64, drift: f64 },
}

impl Error {
    /// Time at which a propagation failed, if the error came from an integrator.
    pub fn failure_time(&self) -> Option<f64> {
        match *self {
            Error::StepUnderflow { t, .. }
            | Error::StepLimit { t, .. }
            | Error::NormDrift { t, .. } => Some(t),
            _ => None,
        }
    }
}
