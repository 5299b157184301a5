use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("term set must not be empty")]
    EmptyTermSet,

    #[error("seed set must not be empty")]
    EmptySeedSet,

    #[error("seeds {first:?} and {second:?} share the token {token:?}")]
    OverlappingSeeds {
        first: String,
        second: String,
        token: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("attaching {child:?} under {parent:?} would create a cycle")]
    Cycle { parent: String, child: String },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("distribution is invalid: {0}")]
    InvalidDistribution(String),

    #[error("normalized entropy needs at least 2 posts, got {0}")]
    TooFewPosts(usize),

    #[error("no posts in {0}")]
    EmptyCorpus(PathBuf),

    #[error("gold set is empty")]
    EmptyGold,

    #[error("malformed gold record {id:?}: {reason}")]
    MalformedGold { id: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("{path}: {source}")]
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
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
