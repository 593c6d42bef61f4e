use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("effective Kerr constant is zero: a linear cavity has no bifurcation")]
    NoBifurcation,

    #[error("unknown parameter set `{0}`")]
    UnknownSet(String),

    #[error("fixed point residual {residual:e} exceeds tolerance {tolerance:e}")]
    FixedPointResidual { residual: f64, tolerance: f64 },

    #[error("integrator step size underflow at t = {t:e} s")]
    StepSizeUnderflow { t: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {t:e} s")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("no limit cycle found: {0}")]
    NoLimitCycle(String),

    #[error("no continuous lower-branch solution after {0} iterations")]
    NoContinuousSolution(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the caller's configuration rather than by
    /// the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::InvalidInput(_)
                | Error::UnknownSet(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
