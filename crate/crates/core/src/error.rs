use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("unsupported comparison between {0} and {1}")]
    UnsupportedComparison(&'static str, &'static str),

    #[error("unknown distribution kind `{0}`")]
    UnknownDistribution(String),

    #[error("distance {distance} m is below the minimum of {minimum} m")]
    BelowMinimumDistance { distance: f64, minimum: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("curve line {line}: {reason}")]
    CurveParse { line: usize, reason: String },

    #[error("distribution mean {mean} deviates from 1 by more than {tolerance}")]
    NotNormalized { mean: f64, tolerance: f64 },

    #[error("sample rate {rate} Hz cannot resolve bursts of period {period} s (need >= {min} Hz)")]
    UnderResolved { rate: f64, period: f64, min: f64 },

    #[error("harvested power {0} W is not positive: the capacitor never charges")]
    NeverCharges(f64),

    #[error("quadrature did not converge: error estimate {0}")]
    Quadrature(f64),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
