use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One broken invariant inside a [`SessionRecord`](crate::model::SessionRecord).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    /// Frame position, when the violation belongs to a telemetry frame.
    pub frame: Option<usize>,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn session(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { frame: None, field: field.into(), message: message.into() }
    }

    pub fn frame(index: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { frame: Some(index), field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frame {
            Some(i) => write!(f, "{} at frame {}: {}", self.field, i, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown attribute `{name}` (nearest valid attribute: `{nearest}`)")]
    UnknownAttribute { name: String, nearest: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("session `{session_id}`: {violation}")]
    InvalidSession { session_id: String, violation: Violation },

    #[error("session `{0}` carries no discomfort report")]
    NoReports(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("class {class} has {count} rows, fewer than the {k} folds requested")]
    ClassTooSmall { class: usize, count: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("feature vector has {got} values, model expects {expected}")]
    FeatureLength { expected: usize, got: usize },

    #[error("registry checksum mismatch: model {model}, data {data}")]
    ChecksumMismatch { model: String, data: String },

    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("degenerate path with {0} waypoints (at least 3 required)")]
    DegeneratePath(usize),

    #[error("confusion matrix is empty")]
    EmptyMatrix,

    #[error("experiment grid is missing cells: {0}")]
    IncompleteGrid(String),

    #[error("no labeled frames to aggregate")]
    NoLabeledFrames,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
