use thiserror::Error;

/// Errors produced by kernel construction and the categorical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate label `{label}` in object `{object}`")]
    DuplicateLabel { object: String, label: String },

    #[error("unknown label `{label}` for object `{object}`")]
    UnknownLabel { object: String, label: String },

    #[error("weight table has {found} entries, expected {expected} ({rows}x{cols})")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite weight at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("negative weight {value} at row {row}, column {col}")]
    NegativeWeight { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, which exceeds 1")]
    RowOverflow { row: usize, sum: f64 },

    #[error("row {row} sums to {sum}; a total kernel needs 1")]
    NotTotal { row: usize, sum: f64 },

    #[error("{context}: `{left}` does not match `{right}`")]
    ObjectMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    #[error("cannot split `{object}` after {split} factors")]
    BadSplit { object: String, split: usize },

    #[error("expected a state (domain I), got domain `{dom}`")]
    NotAState { dom: String },

    #[error("expected a predicate (codomain I), got codomain `{cod}`")]
    NotAPredicate { cod: String },

    #[error("KL divergence undefined: support of the first state is not contained in the second")]
    DivergenceUndefined,

    #[error("invalid tolerances: {0}")]
    Tolerance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
