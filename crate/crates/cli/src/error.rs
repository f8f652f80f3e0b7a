use thiserror::Error;

/// Failure of a CLI run, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("certification failed: {0}")]
    Certification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Certification(_) => 4,
        }
    }

    /// Prefixes the message with where it happened.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{what}: {m}")),
            CliError::Certification(m) => CliError::Certification(format!("{what}: {m}")),
        }
    }
}

impl From<qforce_core::Error> for CliError {
    fn from(e: qforce_core::Error) -> Self {
        use qforce_core::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::Domain(_) | E::Degenerate(_) => CliError::Config(e.to_string()),
            E::Range { .. } | E::Accuracy { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
