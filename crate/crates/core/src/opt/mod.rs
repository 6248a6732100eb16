//! Convex quadratic programming as a reasoning system.
//!
//! Phenomena are QPs over a fixed geometry (Q, box, halfspaces) with varying
//! linear term, explanations are projected-gradient solutions with recovered
//! multipliers, the principles are the KKT conditions, and `g` rebuilds the
//! linear term from a solution.

mod kkt;
mod problem;
mod project;
mod solve;
mod system;

pub use kkt::{kkt_residual, reconstruct_problem, KktResidual};
pub use problem::{Halfspace, QpProblem, CONVEXITY_FLOOR, MAX_DIM};
pub use project::{clamp, infeasibility_certificate, project, Projection, INNER_TOL, MAX_SWEEPS};
pub use solve::{
    recover_multipliers, solve_projected_gradient, solver_trajectory, Multipliers, QpSolution,
    SolverConfig, StepRule, ACTIVITY_TOL,
};
pub use system::{kkt_principles, OptPrinciples, OptSystem, ProblemSource, ProblemSpace, SolutionSpace, KKT_THRESHOLD};

use crate::blocks::BlockError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("solution did not converge")]
    NotConverged,
    #[error("problem file: {0}")]
    Format(#[from] BlockError),
}
