use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// An engine, driver or objective was configured inconsistently.
    #[error("configuration error: {0}")]
    Config(String),

    /// The experiment config file failed validation. Every problem found is listed.
    #[error("invalid experiment config:\n  - {}", .0.join("\n  - "))]
    InvalidConfig(Vec<String>),

    #[error("objective `{name}` failed: {message}")]
    Objective { name: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI, one per error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 64,
            Error::Config(_) | Error::InvalidConfig(_) => 78,
            Error::Objective { .. } => 70,
            Error::Io { .. } => 74,
            Error::Format { .. } => 65,
        }
    }
}
