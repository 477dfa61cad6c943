use thiserror::Error;

/// Errors raised by grid, frame, transform and norm routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("symbol undefined at lattice frequency {0:?}")]
    UndefinedSymbol(Vec<f64>),

    #[error("spectral energy outside the resolved band: relative fraction {fraction:.3e}")]
    BandViolation { fraction: f64 },

    #[error("spectral energy outside the admissible support: relative fraction {fraction:.3e}")]
    SupportViolation { fraction: f64 },

    #[error("direction family too sparse: {count} directions, need at least {required}")]
    InsufficientDirections { count: usize, required: usize },

    #[error("mapped point {0:?} leaves the source fundamental domain")]
    DomainExit(Vec<f64>),

    #[error("root bracket failed: {0}")]
    Bracket(String),

    #[error("field format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
