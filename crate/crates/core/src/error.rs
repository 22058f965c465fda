use thiserror::Error;

/// Errors raised by the sampling and recovery pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot place {pulses} disjoint pulses of width {width} inside an interval of length {beta}")]
    Placement { pulses: usize, width: f64, beta: f64 },

    #[error("ratio is undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("window does not generate a frame for this lattice (lower bound {lower:e})")]
    NotAFrame { lower: f64 },

    #[error("grid too coarse for the frequency lattice: b*dt = {0} exceeds 1/8")]
    Resolution(f64),

    #[error("grid [{t_start}, {t_end}] does not cover the required interval [{lo}, {hi}]")]
    GridCoverage { t_start: f64, t_end: f64, lo: f64, hi: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("columns {support:?} of the sensing matrix are linearly dependent")]
    RankDeficient { support: Vec<usize> },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
