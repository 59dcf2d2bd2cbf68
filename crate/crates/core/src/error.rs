use crate::trajectory::Trajectory;

/// Errors shared by all solver modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A closed-form route was requested for a potential it does not cover.
    #[error("no closed form for this potential: {0}")]
    UnsupportedOracle(&'static str),

    /// The shooting iteration hit its iteration cap; carries the best
    /// endpoint residual reached.
    #[error("shooting did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The grid solver produced non-finite values.
    #[error("field values diverged (non-finite) at step {step}")]
    Divergence { step: usize },

    /// A field query fell outside the stored domain.
    #[error("query outside the field domain: {what} = {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    /// Adjacent-cell gradients disagree too strongly for a trustworthy
    /// velocity query (the action field has a kink near the query point).
    #[error("velocity field is not smooth near x = {x}, t = {t}")]
    NonSmoothField { x: f64, t: f64 },

    /// A piloted trajectory left the field domain before reaching its final
    /// time; carries the partial trajectory up to the exit.
    #[error("trajectory left the field domain at t = {exit_time}")]
    DomainExit {
        exit_time: f64,
        partial: Box<Trajectory>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
