use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("line {line}: unknown event type {value:?}")]
    UnknownEventType { line: usize, value: String },

    #[error("line {line}: invalid timestamp {value:?}")]
    InvalidTimestamp { line: usize, value: String },

    #[error("account {0:?} has no events")]
    EmptyHistory(String),

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("feature vector contains a non-finite value")]
    NonFiniteFeature,

    #[error("model has not been fitted")]
    UnfittedModel,

    #[error("k = {k} exceeds the number of samples ({n})")]
    KTooLarge { k: usize, n: usize },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("majority group has {majority} teams but minority has {minority}")]
    MajorityExhausted { minority: usize, majority: usize },

    #[error("window length {w} exceeds every sequence length")]
    WindowTooLong { w: usize },

    #[error("sequence of length {len} is shorter than window {w}")]
    SequenceTooShort { len: usize, w: usize },

    #[error("sample is empty")]
    EmptySample,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unsupported model document: {0}")]
    ModelFormat(String),

    #[error("missing upstream artifact {}: {hint}", path.display())]
    MissingUpstreamArtifact { path: PathBuf, hint: String },

    #[error("stage `{stage}` failed ({}): {source}", path.display())]
    Stage {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Process exit status classes used by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Validation = 2,
    Data = 3,
    Internal = 4,
}

impl Error {
    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::InvalidParameter(_) | Error::InvalidSpec(_) | Error::InvalidConfig(_) | Error::KTooLarge { .. } => {
                ExitClass::Validation
            }
            Error::Stage { source, .. } => source.exit_class(),
            Error::UnfittedModel => ExitClass::Internal,
            _ => ExitClass::Data,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str, path: impl Into<PathBuf>) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                path: path.into(),
                source: Box::new(e),
            },
        }
    }
}
