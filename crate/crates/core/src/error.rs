//! Shared shape/field errors for vector and matrix plumbing.

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("vectors and matrices must have at least one coordinate")]
    EmptyDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("field mismatch: operands must share one field tag")]
    FieldMismatch,
    #[error("entry has a nonzero imaginary part but the field tag is real")]
    NotReal,
    #[error("matrix rows must all have length {expected}")]
    RaggedRows { expected: usize },
}
