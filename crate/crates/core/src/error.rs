use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field values are not finite at index {0}")]
    NonFinite(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("domain truncation guard breached at t = {t}: outer-annulus mass fraction {fraction:e}")]
    TruncationBreach { t: f64, fraction: f64 },

    #[error("numerical blowup at t = {t}: {reason}")]
    NumericalBlowup { t: f64, reason: String },

    #[error("pair budget exceeded: {pairs} pair evaluations requested, cap is {cap}")]
    BudgetExceeded { pairs: u128, cap: u128 },

    #[error("density below cutoff at grid index {index}")]
    DegenerateDensity { index: usize },

    #[error("quadrature over time needs at least two snapshots, got {0}")]
    InsufficientSnapshots(usize),

    #[error("monotonicity violated on [{t0}, {t1}]: action dropped by {drop:e} (tolerance {tolerance:e})")]
    MonotonicityViolation {
        t0: f64,
        t1: f64,
        drop: f64,
        tolerance: f64,
    },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
