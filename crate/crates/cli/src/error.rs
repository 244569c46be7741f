use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(relyap_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric failures, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 1,
        }
    }
}

impl From<relyap_core::Error> for CliError {
    fn from(e: relyap_core::Error) -> Self {
        match e {
            relyap_core::Error::InvalidArgument(msg) => CliError::Config(msg),
            other => CliError::Numeric(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
