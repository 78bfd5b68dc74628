//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A node id fell outside `[0, n)`.
    NodeOutOfRange { node: usize, n: usize },
    /// An operation that needs nodes got an empty list or an empty graph.
    EmptyNodeList,
    /// A self-loop was passed to a constructor that forbids them.
    SelfLoop { node: usize },
    /// An adjacency matrix expected to be symmetric was not.
    AsymmetricAdjacency { row: usize, col: usize },
    /// Matrix or vector dimensions do not line up.
    ShapeMismatch { context: &'static str },
    /// A non-finite value appeared at the named pipeline stage.
    NonFinite { stage: &'static str },
    /// A non-finite training loss at the given iteration.
    NonFiniteLoss { iteration: usize },
    /// Not enough eligible nodes to satisfy the request.
    InsufficientNodes { needed: usize, available: usize },
    /// A configuration value is out of its legal range.
    InvalidConfig { field: &'static str, message: String },
    /// AUC needs at least one positive and one negative label.
    SingleClassLabels,
    /// Score/label vectors (or round matrices) have mismatched lengths.
    LengthMismatch { left: usize, right: usize },
    /// The graph carries no ground-truth labels but one was required.
    MissingLabels,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NodeOutOfRange { node, n } => {
                write!(f, "node id {node} out of range for graph with {n} nodes")
            }
            Error::EmptyNodeList => write!(f, "operation requires at least one node"),
            Error::SelfLoop { node } => write!(f, "self-loop on node {node} is not storable"),
            Error::AsymmetricAdjacency { row, col } => {
                write!(f, "adjacency not symmetric at ({row}, {col})")
            }
            Error::ShapeMismatch { context } => write!(f, "shape mismatch in {context}"),
            Error::NonFinite { stage } => write!(f, "non-finite value produced in {stage}"),
            Error::NonFiniteLoss { iteration } => {
                write!(f, "non-finite loss at iteration {iteration}")
            }
            Error::InsufficientNodes { needed, available } => {
                write!(f, "need {needed} eligible nodes but only {available} available")
            }
            Error::InvalidConfig { field, message } => {
                write!(f, "invalid config value for `{field}`: {message}")
            }
            Error::SingleClassLabels => {
                write!(f, "labels contain a single class; AUC needs both classes")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::MissingLabels => write!(f, "graph has no anomaly labels"),
        }
    }
}

impl core::error::Error for Error {}
