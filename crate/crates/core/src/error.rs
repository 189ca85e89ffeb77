//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by complex construction, operator assembly, training and
/// the file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// A simplex tuple repeats a vertex or is empty.
    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    /// A value matrix or operand does not match the expected shape.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A degree is outside the range supported by the complex.
    #[error("degree out of range: {0}")]
    Degree(String),

    /// A block in a block-operator specification has the wrong shape.
    #[error("block shape mismatch: {0}")]
    BlockShape(String),

    /// An expression links two nodes whose degrees do not chain.
    #[error("expression degree mismatch: {0}")]
    ChainDegree(String),

    /// A training run produced a non-finite or exploding loss.
    #[error("divergence: {0}")]
    Divergence(String),

    /// Perplexity bisection failed to converge.
    #[error("bandwidth search failed: {0}")]
    Bandwidth(String),

    /// Requested filtration dimension is not supported.
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    /// Two diagrams carry different numbers of infinite points.
    #[error("infinite point mismatch: {0}")]
    InfiniteMismatch(String),

    /// A file could not be read, written or parsed.
    #[error("{0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
