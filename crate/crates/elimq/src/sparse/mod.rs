//! Sparse matrix storage, Matrix Market I/O and pattern algebra.

mod dense;
mod market;
mod matrix;
mod pattern;

pub use dense::{DenseWorkingMatrix, DEFAULT_DENSE_CAP};
pub use market::{load_matrix_market, write_matrix_market};
pub use matrix::SparseMatrix;
pub use pattern::{Permutation, SparsePattern};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SparseError {
    #[error("malformed Matrix Market header: {0}")]
    MalformedHeader(String),
    #[error("index out of range at line {line}: ({row}, {col}) for size {n}")]
    IndexOutOfRange { line: usize, row: usize, col: usize, n: usize },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("matrix is not square: {rows} x {cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("permutation size {perm} does not match pattern size {n}")]
    SizeMismatch { perm: usize, n: usize },
    #[error("matrix of size {n} exceeds dense cap {cap}")]
    TooLargeForDense { n: usize, cap: usize },
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
}
