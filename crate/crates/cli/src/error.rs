use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("duplicate key `{key}` on line {line}")]
    DuplicateKey { key: String, line: usize },

    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("override `{0}` is not of the form key=value")]
    Override(String),

    #[error(transparent)]
    Sim(#[from] shc_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub(crate) fn invalid(key: &str, value: &str, reason: impl Into<String>) -> Self {
        CliError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    /// Stable category name used in the error line and for the exit code.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Syntax { .. }
            | CliError::UnknownKey(_)
            | CliError::DuplicateKey { .. }
            | CliError::InvalidValue { .. }
            | CliError::Override(_) => "config",
            CliError::Sim(shc_core::Error::Config(_) | shc_core::Error::Parameter { .. }) => {
                "config"
            }
            CliError::Sim(_) => "simulation",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io",
            CliError::Pool(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "io" => 3,
            _ => 1,
        }
    }
}
