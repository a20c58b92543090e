//! Orthant-based adaptive second-order solver for `ℓ1`-regularized smooth
//! convex problems, `min f(x) + μ‖x‖₁`.

pub mod baseline;
pub mod cli;
pub mod data_io;
pub mod diagnostics;
pub mod error;
pub mod numkit;
pub mod objective;
pub mod orthant;
pub mod solver;
pub mod subspace;

pub use error::{Error, Result};
pub use numkit::CsrMatrix;
pub use objective::{LeastSquaresLoss, LogisticLoss, Problem, QuadraticLoss, SmoothObjective};
pub use solver::{solve, SolveReport, SolverConfig, Termination};
