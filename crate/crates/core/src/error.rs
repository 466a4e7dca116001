use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("invalid cost for agent {agent}: {reason}")]
    InvalidCost { agent: usize, reason: String },

    #[error("iterate became non-finite at iteration {k} (stepsize too large?)")]
    Divergence { k: usize },

    #[error("internal invariant violated at iteration {k}: {what}")]
    InvariantViolation { k: usize, what: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("fit window [{k0}, {k1}] contains non-positive or sub-floor values; try k0 >= {suggested_k0}")]
    FitWindow { k0: usize, k1: usize, suggested_k0: usize },

    #[error("generator spec error: {0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attaches the iteration index to errors raised inside a step function.
    pub fn at_step(self, k: usize) -> Self {
        match self {
            Error::Divergence { .. } => Error::Divergence { k },
            Error::InvariantViolation { what, .. } => Error::InvariantViolation { k, what },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
