use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record, field `{field}`: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        field: String,
        reason: String,
    },

    #[error("duplicate message ({source_dataset}, {id}) at line {first_line} and line {second_line}")]
    DuplicateMessage {
        source_dataset: String,
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("message {message_id} references unknown event `{event_id}`")]
    DanglingEvent { message_id: String, event_id: String },

    #[error("unknown selection attribute `{0}` (expected language, hazard_type, event_id or source_dataset)")]
    UnknownAttribute(String),

    #[error("invalid label mapping: {0}")]
    InvalidMapping(String),

    #[error("no taxonomy record for event `{0}`")]
    MissingTaxonomy(String),

    #[error("event `{0}` has conflicting taxonomy fields across sources")]
    EventConflict(String),

    #[error("insufficient signal for language detection")]
    InsufficientSignal,

    #[error("no language profiles loaded")]
    NoProfiles,

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("{path}:{line}: expected {expected} dimensions, found {found}")]
    DimensionMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("message `{id}` not found in contextual cache `{model_name}`")]
    MissingCacheEntry { id: String, model_name: String },

    #[error("representation {representation} requires missing resource: {resource}")]
    MissingResource {
        representation: String,
        resource: String,
    },

    #[error("missing translations for {} message(s): {}", .0.len(), .0.join(", "))]
    MissingTranslations(Vec<String>),

    #[error("translation failed: {0}")]
    Translation(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("target has no held-out event ({language}, {domain})")]
    NoHeldOutEvent { language: String, domain: String },

    #[error("nothing to train on for {0}")]
    EmptyTraining(String),

    #[error("class {0} is empty")]
    EmptyClass(String),

    #[error("corpus hash mismatch: manifest has {expected}, corpus is {actual}")]
    HashMismatch { expected: String, actual: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("impurity of an empty node is undefined")]
    EmptyNode,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("expected {expected} features, got {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("model file is corrupt: {0}")]
    CorruptModel(String),

    #[error("version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: String, found: String },

    #[error("duplicate report cell ({0})")]
    DuplicateCell(String),

    #[error("cells for target {0} do not share the same test set")]
    TestSetMismatch(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The innermost error under any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }

    /// Wraps the error with a description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
