use thiserror::Error;

/// Every failure the library can report.
///
/// `kind()` gives a stable machine-readable tag, used by the CLI when it
/// writes error JSON.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("finite-difference Jacobian is singular (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },
    #[error("no sign change on [{lo}, {hi}]: f(lo)={flo:e}, f(hi)={fhi:e}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("step size underflow at t={t} (h={h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("more than {limit} events fired")]
    EventStorm { limit: usize },
    #[error("branch lost at parameter {parameter}")]
    BranchLost { parameter: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frame {0} is not defined for the one-turn model")]
    InvalidFrame(&'static str),
    #[error("operation needs a smoothened model (b > 0)")]
    SharpModel,
    #[error("operation needs a sharp model (b = 0), got b = {0}")]
    NonSharp(f64),
    #[error("{what} = {value} is outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },
    #[error("branch convention violated: T1 = {t1} must be negative")]
    BranchViolation { t1: f64 },
    #[error("no reflection found at E = {energy} even for N = E")]
    NoReflectionFound { energy: f64 },
    #[error("sample is not a solution of the reduced system (residual {residual:e})")]
    InvalidSample { residual: f64 },
    #[error("glued curve would have F0 = {f0:e} <= 0 at E = {energy:e}")]
    UnitarityViolation { energy: f64, f0: f64 },
    #[error("no physical branch covers E = {energy:e}")]
    CoverageGap { energy: f64 },
    #[error("orbit residual {residual:e} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },
    #[error("Mathieu parameter q = {q} is too small for WKB (need q > 25)")]
    SmallQ { q: f64 },
    #[error("trajectory did not leave the sphaleron vicinity")]
    NoEscape,
    #[error("perturbation stayed bounded for {periods} periods")]
    NoGrowth { periods: f64 },
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonConvergence { .. } => "NonConvergence",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::EventStorm { .. } => "EventStorm",
            Error::BranchLost { .. } => "BranchLost",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvalidFrame(_) => "InvalidFrame",
            Error::SharpModel => "SharpModel",
            Error::NonSharp(_) => "NonSharp",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::BranchViolation { .. } => "BranchViolation",
            Error::NoReflectionFound { .. } => "NoReflectionFound",
            Error::InvalidSample { .. } => "InvalidSample",
            Error::UnitarityViolation { .. } => "UnitarityViolation",
            Error::CoverageGap { .. } => "CoverageGap",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::SmallQ { .. } => "SmallQ",
            Error::NoEscape => "NoEscape",
            Error::NoGrowth { .. } => "NoGrowth",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
