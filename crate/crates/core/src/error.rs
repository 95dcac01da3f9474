use std::path::PathBuf;

use crate::models::WeightSnapshot;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid signal: {0}")]
    Signal(String),

    #[error("{0}")]
    Data(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("invalid weight snapshot: {0}")]
    Snapshot(String),

    #[error("reference set is degenerate: {0}")]
    Degenerate(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Training hit a non-finite loss or gradient. Carries the best weights
    /// seen before the failure, if any epoch completed.
    #[error("training aborted at epoch {epoch}: non-finite {what}")]
    TrainingDiverged {
        epoch: usize,
        what: &'static str,
        last_good: Option<Box<WeightSnapshot>>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures caused by numerical blow-up rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite(_) | Error::TrainingDiverged { .. })
    }
}
