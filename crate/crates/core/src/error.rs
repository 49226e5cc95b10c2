use thiserror::Error;

/// Errors raised by graph construction, parsing and the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaplaxError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({u}, {v}) has non-positive or non-finite weight {w}")]
    BadWeight { u: usize, v: usize, w: f64 },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("row {row} is not diagonally dominant")]
    NotDiagonallyDominant { row: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("tree does not span the graph: {0}")]
    NotSpanning(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("priority queue: {0}")]
    Queue(String),
    #[error("sparsifier failed {attempts} times in a row at chain level {level}")]
    SparsifyExhausted { level: usize, attempts: usize },
    #[error("internal invariant violated: {0}")]
    Tripwire(String),
    #[error("chain container: {0}")]
    Container(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for LaplaxError {
    fn from(e: std::io::Error) -> Self {
        LaplaxError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LaplaxError>;
