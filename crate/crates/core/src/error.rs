use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps onto a stable process exit code (see [`Error::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("numerical error in {path}: {message}")]
    Numerical { path: String, message: String },

    #[error("corrupt weight file: {0}")]
    Corruption(String),

    #[error("incompatible weight file: {0}")]
    Incompatible(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    ///
    /// `0` success and `1` self-check failure are reserved by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Input(_) | Error::Io { .. } => 2,
            Error::Config(_) => 3,
            Error::Numerical { .. } => 4,
            Error::Corruption(_) | Error::Incompatible(_) => 5,
        }
    }
}
