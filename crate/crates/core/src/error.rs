use thiserror::Error;

/// Errors produced by graph construction, problem setup and the solver.
///
/// Node indices carried in variants are 1-based, matching the external
/// numbering used by file formats and the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge ({i},{j}) listed twice with different weights {first} and {second}")]
    DuplicateEdgeConflict {
        i: usize,
        j: usize,
        first: f64,
        second: f64,
    },
    #[error("edge ({i},{j}) has nonpositive weight {weight}")]
    NonpositiveWeight { i: usize, j: usize, weight: f64 },
    #[error("too few nodes: need at least {min}, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("non-square grid {nx}x{ny} on a square domain")]
    NonSquareGrid { nx: usize, ny: usize },
    #[error("node {node} out of range 1..={count}")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("edge ({0},{1}) is not in the graph")]
    EdgeNotInGraph(usize, usize),
    #[error("edge list is not a spanning tree: {0}")]
    NotASpanningTree(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative density {value} at node {node}")]
    NegativeDensity { node: usize, value: f64 },
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("time level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("graph is not a 1D periodic lattice")]
    NotA1DLattice,
    #[error("graph is not a 2D periodic lattice")]
    NotA2DLattice,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("singular Jacobian at Newton iteration {iteration}: {detail}")]
    SingularJacobian { iteration: usize, detail: String },
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("non-finite residual at Newton iteration {0}")]
    NonFiniteResidual(usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DisconnectedGraph { .. } => "DisconnectedGraph",
            Error::SelfLoop(_) => "SelfLoop",
            Error::DuplicateEdgeConflict { .. } => "DuplicateEdgeConflict",
            Error::NonpositiveWeight { .. } => "NonpositiveWeight",
            Error::TooFewNodes { .. } => "TooFewNodes",
            Error::NonSquareGrid { .. } => "NonSquareGrid",
            Error::NodeOutOfRange { .. } => "NodeOutOfRange",
            Error::EdgeNotInGraph(..) => "EdgeNotInGraph",
            Error::NotASpanningTree(_) => "NotASpanningTree",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NegativeDensity { .. } => "NegativeDensity",
            Error::InvalidDensity(_) => "InvalidDensity",
            Error::LevelOutOfRange { .. } => "LevelOutOfRange",
            Error::NotA1DLattice => "NotA1DLattice",
            Error::NotA2DLattice => "NotA2DLattice",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::MaxIterationsExceeded { .. } => "MaxIterationsExceeded",
            Error::NonFiniteResidual(_) => "NonFiniteResidual",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
