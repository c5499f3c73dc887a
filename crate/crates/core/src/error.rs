use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("normalization failed: {0}")]
    Normalization(String),

    #[error("inconsistent level: {0}")]
    ModelConsistency(String),

    #[error("pole at abscissa {abscissa}: grid point coincides with a level having zero eliminated width")]
    Pole { abscissa: f64 },

    #[error("singular collision denominator (|D| = {magnitude:e})")]
    SingularDenominator { magnitude: f64 },

    #[error("at abscissa {abscissa}: {source}")]
    At { abscissa: f64, source: Box<Error> },

    #[error("grid too coarse: {samples_per_width:.3} samples per mean width (need at least 1)")]
    Resolution { samples_per_width: f64 },

    #[error("flat series: zero variance after detrending")]
    FlatSeries,

    #[error("series too short: {len} samples, need at least {required}")]
    TooShort { len: usize, required: usize },

    #[error("line {line}: {reason}")]
    Ingest { line: usize, reason: String },

    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
