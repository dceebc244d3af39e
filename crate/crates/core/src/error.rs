use thiserror::Error;

use crate::dsl::DslError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested time is at or past the singularity of a closed form.
    #[error("t = {t} is at or beyond the blow-up time t* = {t_star}")]
    BeyondBlowUp { t: f64, t_star: f64 },

    /// The level is finite mathematically but does not fit in an f64.
    #[error("level overflows f64 at t = {t}")]
    Overflow { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}) without threshold crossing; system looks stiff")]
    Stiff { t: f64, h: f64 },

    #[error("step budget of {steps} steps exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize },

    #[error("vector field failed at t = {t}: {detail}")]
    Field { t: f64, detail: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Dsl(#[from] DslError),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
