use perfpriv_core::Error as CoreError;

/// Everything that can stop a command, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{0}")]
    Numerical(String),

    #[error("{0}")]
    SizeCap(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::SizeCap(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SizeCap { .. } => CliError::SizeCap(e.to_string()),
            CoreError::Numerical(_) | CoreError::Contract(_) => CliError::Numerical(e.to_string()),
            CoreError::InvalidInput(m) => CliError::Invalid(m),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}
