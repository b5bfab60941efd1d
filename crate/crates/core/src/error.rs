use crate::Rational;

/// Which axis of a matrix or mesh an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Columns of a transformation matrix, or the `u` axis of a copula.
    X,
    /// Rows of a transformation matrix, or the `v` axis of a copula.
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => f.write_str("column"),
            Axis::Y => f.write_str("row"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("negative entry {value} at (i={i}, j={j})")]
    NegativeEntry { i: usize, j: usize, value: Rational },

    #[error("total mass is {total}, expected 1")]
    MassNotOne { total: Rational },

    #[error("{axis} {index} has no positive entry")]
    EmptyRowOrColumn { axis: Axis, index: usize },

    #[error("matrix must be rectangular and at least 1x1")]
    BadShape,

    #[error(
        "block {block} has rank greater than one: minor over columns ({}, {}) and rows ({}, {}) is {value}",
        columns.0, columns.1, rows.0, rows.1
    )]
    RankExceedsOne {
        block: usize,
        columns: (usize, usize),
        rows: (usize, usize),
        value: Rational,
    },

    #[error("{axis} marginal {index} has mass {found}, expected {expected}")]
    BadMarginal {
        axis: Axis,
        index: usize,
        found: Box<Rational>,
        expected: Box<Rational>,
    },

    #[error("breakpoints do not form a partition of [0, 1]: {0}")]
    NotAPartition(String),

    #[error("value {0} is out of range")]
    OutOfRange(Rational),

    #[error("the patching operator is not a contraction and the tolerance was not met after {depth} steps")]
    NoContraction { depth: usize },

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("address entry {entry} is not a block index (expected 0..{blocks})")]
    BadAddress { entry: usize, blocks: usize },

    #[error("step map is not measure preserving: {0}")]
    NotMeasurePreserving(String),

    #[error("factor product differs from the patched copula at depth {depth}")]
    FactorizationMismatch { depth: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
