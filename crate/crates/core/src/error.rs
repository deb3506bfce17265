use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A required semantic channel has no column binding in the mapping or
    /// the bound column is absent from the header.
    #[error("{channel} unmapped: {detail}")]
    UnmappedChannel { channel: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A caller violated an operation precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty library: no failed training runs to draw exemplars from")]
    EmptyLibrary,

    #[error("config digest mismatch: artifact has {found}, expected {expected}")]
    DigestMismatch { expected: String, found: String },

    /// Malformed artifact or data file.
    #[error("format error: {0}")]
    Format(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::UnmappedChannel { .. } | Error::Config(_) => ErrorKind::Config,
            Error::Invariant(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
