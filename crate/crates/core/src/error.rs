use thiserror::Error;

use crate::metric::MetricViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("vertex subset must be nonempty")]
    EmptySubset,

    #[error("vertex subset must be strictly increasing")]
    UnsortedSubset,

    #[error("operation needs at least {needed} vertices, got {got}")]
    TooFewVertices { needed: usize, got: usize },

    #[error("operation supports at most {max} vertices, got {got}")]
    TooManyVertices { max: usize, got: usize },

    #[error("expected {expected} entries, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(#[from] MetricViolation),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid range assignment: {0}")]
    InvalidRanges(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("edge ({0}, {1}) closes no cycle: endpoints lie in different components")]
    NoCycle(usize, usize),

    #[error("forest is not the minimum spanning forest of the disk graph")]
    NotMsf,

    #[error("vertex order is not a permutation of 0..{0}")]
    NotPermutation(usize),

    #[error("operation requires a metric instance, got a general weighted graph")]
    NotAMetric,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
