use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord { path: PathBuf, line: usize, reason: String },

    #[error("{path}:{line}: duplicate document id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },

    #[error("vocabulary is empty after filtering with min_count={min_count}; try a lower min_count")]
    EmptyVocabulary { min_count: usize },

    #[error("node {node} is not in the graph ({nodes} nodes)")]
    UnknownNode { node: u32, nodes: usize },

    #[error("cannot anonymize an empty walk")]
    EmptyWalk,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training data has a single class ({0}); at least two are required")]
    SingleClass(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {predictions} predictions vs {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("non-finite loss at epoch {epoch}: {detail}")]
    NonFiniteLoss { epoch: usize, detail: String },

    #[error("data has zero variance; cannot project")]
    ZeroVariance,

    #[error("unsupported {format} version {found} (supported: {supported})")]
    Version { format: &'static str, found: String, supported: u32 },

    #[error("truncated or malformed {format} artifact: {detail}")]
    Truncated { format: &'static str, detail: String },

    #[error("digest mismatch for {what}: expected {expected:016x}, found {found:016x}")]
    DigestMismatch { what: String, expected: u64, found: u64 },

    #[error("{phase} failed")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Tag an error with the pipeline phase that produced it.
    pub fn in_phase(self, phase: &'static str) -> Self {
        match self {
            e @ Error::Phase { .. } => e,
            e => Error::Phase { phase, source: Box::new(e) },
        }
    }
}

pub(crate) trait PhaseExt<T> {
    fn phase(self, phase: &'static str) -> Result<T>;
}

impl<T> PhaseExt<T> for Result<T> {
    fn phase(self, phase: &'static str) -> Result<T> {
        self.map_err(|e| e.in_phase(phase))
    }
}
