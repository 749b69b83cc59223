use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Core(#[from] vmdcvm::Error),

    #[error("{path}: {source}")]
    File { path: String, source: vmdcvm::Error },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 usage, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use vmdcvm::Error as E;
        let core = match self {
            CliError::Usage(_) => return 2,
            CliError::Core(e) | CliError::File { source: e, .. } => e,
        };
        match core {
            E::InvalidParameter { .. } | E::UnknownSignal(_) => 2,
            E::TooFewSegments { .. } => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}
