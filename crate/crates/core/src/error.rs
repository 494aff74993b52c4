use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a physical or statistical formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("sampler gave up after {attempts} rejected draws")]
    SamplerExhausted { attempts: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("histograms do not share bin edges")]
    EdgeMismatch,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero target value at index {0}; percentage error undefined")]
    ZeroTarget(usize),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("unknown gas {name:?}; available: {}", available.join(", "))]
    UnknownGas { name: String, available: Vec<String> },

    #[error("unknown column {name:?}; available: {}", available.join(", "))]
    UnknownColumn { name: String, available: Vec<String> },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this error: 2 for data or validation problems,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } | Error::SamplerExhausted { .. } => 3,
            _ => 2,
        }
    }
}
