use overlap_ec::EcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameters: {0}")]
    Invalid(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io { .. } | CliError::Serialize(_) => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<EcError> for CliError {
    fn from(e: EcError) -> Self {
        match e {
            EcError::InvalidParameters(msg) => CliError::Invalid(msg),
            EcError::Domain { .. } | EcError::Parse { .. } => CliError::Invalid(e.to_string()),
            EcError::ResourceLimit(msg) => CliError::Resource(msg),
            EcError::Numerical { .. } | EcError::NoSignChange { .. } => CliError::Numerical(e.to_string()),
            EcError::Io(source) => CliError::io("i/o", source),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Serialize(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
