use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// A configuration field failed validation.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("config file is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("ground-truth generator: {0}")]
    Generator(String),
    #[error(transparent)]
    Solver(#[from] regrad::Error),
    #[error("trace file: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        BenchError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for solver runaway
    /// or line-search failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Solver(regrad::Error::Runaway { .. } | regrad::Error::LineSearch { .. }) => 2,
            _ => 1,
        }
    }
}

pub type BenchResult<T> = Result<T, BenchError>;
