use std::path::PathBuf;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Dimension / shape mismatch between operands.
    #[error("shape error: {0}")]
    Shape(String),

    /// Invalid configuration; names the violated constraint.
    #[error("config error: {0}")]
    Config(String),

    /// Argument outside its valid domain (e.g. timestep out of range).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at or beyond the interpolation singularity t = 1.
    #[error("singularity error: {0}")]
    Singularity(String),

    /// An operation contract was violated (non-scalar loss, empty inputs, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// A weight edit was applied twice.
    #[error("idempotency error: {0}")]
    Idempotency(String),

    /// Index outside a valid range.
    #[error("range error: {0}")]
    Range(String),

    /// Checkpoint magic/version mismatch or malformed layout.
    #[error("format error: {0}")]
    Format(String),

    /// Checkpoint payload corruption (CRC or length mismatch).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Training aborted on a non-finite loss or gradient.
    #[error("training aborted at step {step}: {reason}")]
    TrainAbort { step: usize, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
