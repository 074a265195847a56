use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("moment order must be at least 3, got {0}")]
    OrderTooLow(usize),

    #[error("accommodation coefficient must lie in [0, 1], got {0}")]
    Accommodation(f64),

    #[error("states belong to different moment spaces (M = {0} vs M = {1})")]
    SpaceMismatch(usize, usize),

    #[error("invalid moment state: {0}")]
    InvalidState(#[from] crate::moments::Violation),

    #[error("positivity lost in cell {cell} during {stage}: rho = {rho}, theta = {theta}")]
    Positivity {
        cell: usize,
        stage: &'static str,
        rho: f64,
        theta: f64,
    },

    #[error("no steady state after {steps} steps (last residual {residual:e})")]
    NotConverged { steps: usize, residual: f64 },

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonPositive { what, value })
    }
}
