use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a digraph on {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("size overflow: {0}")]
    SizeOverflow(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("parse error at position {position}: {message}")]
    Expression { position: usize, message: String },

    #[error("unknown condition `{0}`")]
    UnknownCondition(String),

    #[error("missing symbol `{0}`")]
    MissingSymbol(String),

    #[error("missing variable `{0}`")]
    MissingVariable(String),

    #[error("arity mismatch for `{symbol}`: expected {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("universe of size {0} exceeds the table-search limit of 64 elements")]
    UniverseTooLarge(usize),

    #[error("search node limit of {0} exceeded")]
    NodeLimit(u64),

    #[error("generation cap of {cap} exceeded (reached {reached})")]
    CapExceeded { cap: usize, reached: usize },

    #[error("not a product decomposition polymorphism: {0}")]
    NotProductDecomposition(String),

    #[error("not a power decomposition: {0}")]
    NotPowerDecomposition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
