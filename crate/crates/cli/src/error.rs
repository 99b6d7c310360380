use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or invalid configuration; `pointer` is a JSON pointer into the config.
    #[error("config error at '{pointer}': {message}")]
    Config { pointer: String, message: String },
    #[error("dispatch error: {0}")]
    Dispatch(String),
    #[error("unknown recipe '{name}'; available recipes: {}", available.join(", "))]
    UnknownRecipe { name: String, available: Vec<String> },
    #[error("numerical failure: {0}")]
    Numerical(#[from] spinbath::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { pointer: pointer.into(), message: message.into() }
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Dispatch(_) | CliError::UnknownRecipe { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
