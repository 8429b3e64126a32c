use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid population: {0}")]
    Population(String),

    #[error("invalid cost structure: {0}")]
    Costs(String),

    #[error("invalid belief table: {0}")]
    Beliefs(String),

    #[error("agent {agent} out of range for population of {n}")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("pair ({0}, {0}) is not a pair of distinct agents")]
    SelfPair(usize),

    #[error("link {0}-{1} already present")]
    LinkPresent(usize, usize),

    #[error("metric undefined: {0}")]
    Undefined(&'static str),

    #[error("enumeration limited to {max} agents, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("precondition violated for {claim}: {reason}")]
    Precondition { claim: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
