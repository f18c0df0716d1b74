use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("genome length {actual} does not match required length {expected}")]
    GenomeLength { expected: usize, actual: usize },

    #[error("gene {position}: argument {arg} out of range for {node_count} nodes")]
    GeneArgument {
        position: usize,
        arg: usize,
        node_count: usize,
    },

    #[error("invalid gene `{0}`")]
    ParseGene(String),

    #[error("parents have different lengths ({0} vs {1})")]
    ParentLength(usize, usize),

    #[error("histograms do not share bin edges")]
    BinMismatch,

    #[error("invalid histogram range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no graphs for class {0:?} in corpus")]
    EmptyClass(Option<u32>),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("graph object {index}: {message}")]
    Schema { index: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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
