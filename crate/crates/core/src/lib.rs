//! Wasserstein geodesics on weighted graphs by Newton's method on a
//! time-discretized Hamiltonian boundary value problem.

pub mod densities;
pub mod error;
pub mod graph;
pub mod io;
pub mod jacobian;
pub mod linsolve;
pub mod metrics;
pub mod mobility;
pub mod newton;
pub mod scenario;
pub mod system;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{Edge, Lattice1d, Lattice2d, WeightedGraph};
pub use metrics::{DistanceEstimates, NodalVelocity};
pub use mobility::MobilityModel;
pub use newton::{default_initial_guess, newton_solve, JacobianMode, SolveConfig, SolveReport};
pub use system::{SolverState, StateLayout, Trajectory, TransportProblem};
pub use tree::SpanningTree;
