use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate user_id `{0}`")]
    DuplicateUser(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid rule set: {0}")]
    InvalidRules(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("edge kind {kind:?} cannot connect {a:?} and {b:?}")]
    EdgeKindMismatch {
        kind: crate::graph::EdgeKind,
        a: crate::graph::NodeId,
        b: crate::graph::NodeId,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("nothing to evaluate: {0}")]
    EmptyEvaluation(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
