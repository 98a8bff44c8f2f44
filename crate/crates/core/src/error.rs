use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input length {len} is not a multiple of {multiple}")]
    InputLength { len: usize, multiple: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: f64, right: f64 },

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("synchronization failed: peak is {ratio:.2}x the median sidelobe (need {threshold}x)")]
    SyncFailure { ratio: f64, threshold: f64 },

    #[error("equalizer diverged (mu = {mu}, mu_p = {mu_p}) at block {block}")]
    Divergence { mu: f64, mu_p: f64, block: usize },

    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("unsupported modulation order {0} (expected 4, 16, 32 or 64)")]
    UnsupportedOrder(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
