use thiserror::Error;

/// Errors produced by dataset handling, the samplers and the predictors.
#[derive(Debug, Error)]
pub enum SeqError {
    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("sequence of length {len} is too short for order {order} (need at least {})", order + 1)]
    SequenceTooShort { len: usize, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("log-density is not finite at the current point ({0})")]
    NonFiniteDensity(f64),

    #[error("failed to bracket the target CDF level u={u} (lo={lo}, hi={hi}); the CDF is suspect")]
    BracketFailure { u: f64, lo: f64, hi: f64 },

    #[error("inversion did not reach tolerance after {iters} iterations (residual {residual:e})")]
    InversionFailure { iters: usize, residual: f64 },

    #[error("chain is empty or inconsistent: {0}")]
    InvalidChain(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SeqError>;
