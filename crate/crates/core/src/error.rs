use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A tail index at or below 2 leaves the partial sum without a Gaussian
    /// limit (infinite variance, or the critical boundary case).
    #[error(
        "Frechet tail index alpha = {alpha} is not supported: alpha must exceed 2 \
         (alpha < 2 has infinite variance, alpha = 2 is the critical case where the \
         joint limit with the partial sum is not covered)"
    )]
    InfiniteOrCriticalVariance { alpha: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("levels must be nonincreasing in x (nondecreasing in intensity): {0}")]
    NonMonotoneLevels(String),

    #[error("caps must be nondecreasing, got {0:?}")]
    NonMonotoneCaps(Vec<u32>),

    #[error("intensity is infinite at level x = {x} (G(x) = 0)")]
    InfiniteIntensity { x: f64 },

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
