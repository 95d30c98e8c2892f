use thiserror::Error;

/// Errors raised by the solvers and the run driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BistabError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular parameters: closed-form denominator vanishes for mode {mode} at x = {x}")]
    Singular { mode: u8, x: f64 },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("not a fixed point: residual {0:e} exceeds the refinement gate")]
    NotAFixedPoint(f64),

    #[error("marginal stability: {0}")]
    Marginal(String),

    #[error("step size underflow at t = {t} (h = {h:e}); system too stiff for the explicit integrator")]
    StepUnderflow { t: f64, h: f64, last: Box<crate::model::MeanFieldState> },

    #[error("maximum number of integrator steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("undefined transmittance normalization: drive of mode {0} is zero")]
    ZeroDrive(u8),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BistabError {
    fn from(e: std::io::Error) -> Self {
        BistabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BistabError>;
