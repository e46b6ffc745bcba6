use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),

    #[error("repository unreadable: {path}: {reason}")]
    RepoUnreadable { path: PathBuf, reason: String },

    #[error("corrupt object {object} in {path}")]
    CorruptObject { path: PathBuf, object: String },

    #[error("git failed in {path}: {reason}")]
    Git { path: PathBuf, reason: String },

    #[error("no repositories found under {0}")]
    EmptyCorpus(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset {path}: {reason}")]
    Dataset { path: PathBuf, reason: String },

    #[error("library {0:?} has no outgoing migration edges")]
    NoOutgoingEdges(String),

    #[error("library {0:?} has no migration edges")]
    IsolatedNode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from the data being processed (as opposed to
    /// how the run was configured).
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyCorpus(_)
                | Error::Dataset { .. }
                | Error::MalformedManifest(_)
                | Error::RepoUnreadable { .. }
                | Error::CorruptObject { .. }
                | Error::Git { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
