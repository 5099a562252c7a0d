use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
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

    #[error("no edges in {0}")]
    NoEdges(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: u64, n: usize },

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("invalid DRAM configuration: {0}")]
    DramConfig(String),

    #[error("address {address:#x} out of range for channel capacity {capacity:#x}")]
    AddressOutOfRange { address: u64, capacity: u64 },

    #[error("channel {channel} out of range ({channels} channels)")]
    ChannelOutOfRange { channel: usize, channels: usize },

    #[error("destination vertex {vertex} has no partition (k = {partitions})")]
    Unroutable { vertex: u32, partitions: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("simulation deadlock: {0}")]
    Deadlock(String),

    #[error("degenerate run: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
