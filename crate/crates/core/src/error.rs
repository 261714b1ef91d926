use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("no sign change of {what} found within [{lo}, {hi}]")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    #[error("numerical inconsistency: {0}")]
    Inconsistent(String),

    #[error("PSOR did not converge at time step {step} after {iterations} iterations (worst residual {worst_residual:e})")]
    PsorNotConverged {
        step: usize,
        iterations: usize,
        worst_residual: f64,
    },

    #[error("degenerate surface: no node exceeds the threshold at time level {level}")]
    DegenerateSurface { level: usize },

    #[error("quadrature did not converge (last change {last_change:e})")]
    Quadrature { last_change: f64 },

    #[error("problem too large for exhaustive enumeration: {0}")]
    SizeGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
