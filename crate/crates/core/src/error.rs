use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {point} does not lie in the region of vertex {vertex}")]
    OutsideRegion { vertex: usize, point: String },

    #[error("point {point} lies in {count} regions")]
    Partition { point: String, count: usize },

    #[error("probabilities at vertex {vertex} sum to {sum}")]
    Normalization { vertex: usize, sum: f64 },

    #[error("probability of edge {edge} is {value}, below delta = {delta}")]
    Positivity { edge: usize, value: f64, delta: f64 },

    #[error("inadmissible word: edge {position} does not continue the path")]
    InadmissibleWord { position: usize },

    #[error("enumeration would produce more than {cap} words")]
    ResourceLimit { cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("graph: {0}")]
    Graph(String),

    #[error("no base point for vertex {0}")]
    MissingBasePoint(usize),

    #[error("format: {0}")]
    Format(String),

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
