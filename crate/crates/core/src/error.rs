use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid must be strictly increasing and positive (index {index}, t = {time})")]
    InvalidGrid { index: usize, time: f64 },

    #[error("grid has {grid} points but {values} values")]
    LengthMismatch { grid: usize, values: usize },

    #[error("CDF value {value} at index {index} is outside [0, 1] or decreases")]
    NonMonotone { index: usize, value: f64 },

    #[error("prior CDF must end at 1, found {0}")]
    FinalValueNotOne(f64),

    #[error("precision must be nonnegative and finite, found {0}")]
    NegativePrecision(f64),

    #[error("lifetime {0} is not a positive finite time")]
    NonPositiveTime(f64),

    #[error("no samples supplied")]
    EmptySample,

    #[error("no observed failures; the product-limit estimate is undefined")]
    NoFailures,

    #[error("t = {time} lies beyond the estimable range (horizon {horizon})")]
    BeyondEstimableRange { time: f64, horizon: f64 },

    #[error("moments m = {mean}, s = {second} have zero variance")]
    ZeroVariance { mean: f64, second: f64 },

    #[error("moments m = {mean}, s = {second} are not attainable by a beta distribution")]
    InconsistentMoments { mean: f64, second: f64 },

    #[error("interval level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),

    #[error("invalid beta shape ({a}, {b}) at grid index {index}")]
    InvalidShape { index: usize, a: f64, b: f64 },

    #[error("moment curve invalid at index {index}: {reason}")]
    InvalidCurve { index: usize, reason: &'static str },

    #[error("no moment curve for component `{0}`")]
    MissingLeaf(String),

    #[error("group has {0} children; series and parallel groups need at least 2")]
    EmptyGroup(usize),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("name `{0}` is used more than once in the block diagram")]
    DuplicateName(String),

    #[error("censoring fraction {0} must lie in [0, 1)")]
    InvalidCensorFraction(f64),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("{0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Failures caused by degenerate numbers rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BeyondEstimableRange { .. }
                | Error::ZeroVariance { .. }
                | Error::InconsistentMoments { .. }
                | Error::InvalidShape { .. }
                | Error::InvalidCurve { .. }
                | Error::NonMonotone { .. }
                | Error::NegativePrecision(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
