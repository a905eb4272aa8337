use thiserror::Error;

pub type Result<T, E = WorkbenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("missing dependency: {0}")]
    MissingDependency(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl WorkbenchError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            WorkbenchError::Config(_) => 2,
            WorkbenchError::Numeric(_) => 3,
            WorkbenchError::MissingDependency(_) => 4,
            WorkbenchError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        WorkbenchError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<superscar::Error> for WorkbenchError {
    fn from(e: superscar::Error) -> Self {
        match e {
            superscar::Error::Io(source) => WorkbenchError::Io { path: "<core>".into(), source },
            superscar::Error::Parse { .. } => WorkbenchError::Config(e.to_string()),
            other => WorkbenchError::Numeric(other.to_string()),
        }
    }
}
