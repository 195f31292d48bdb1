use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown config key `{key}` (valid keys: {valid})")]
    UnknownKey { key: String, valid: String },

    #[error("invalid value `{value}` for config key `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("missing required config key `{0}`")]
    MissingKey(String),

    #[error("malformed config line {line}: `{text}`")]
    Syntax { line: usize, text: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite parameter `{what}` at step {step}")]
    NonFinite { step: u64, what: &'static str },

    #[error("malformed data file {path}: {reason}")]
    Data { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. } => 1,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Data { .. } => 1,
            _ => 2,
        }
    }
}
