use thiserror::Error;

pub type Result<T, E = EcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EcError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A function was evaluated outside its open domain `(lo, hi)`.
    #[error("argument {x} outside the domain ({lo}, {hi})")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("numerical failure: {message} (after {iterations} iterations, last residual {residual:e})")]
    Numerical {
        message: String,
        iterations: usize,
        residual: f64,
    },

    /// The scan for the last sign change found none; `trace` holds the
    /// `(r, h(r))` pairs that were evaluated.
    #[error("no sign change of the exponent on (0, {r_max}]")]
    NoSignChange { r_max: f64, trace: Vec<(f64, f64)> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        EcError::InvalidParameters(msg.into())
    }
}
