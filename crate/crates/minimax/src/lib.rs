//! Descent solver for finite minimax problems `min_x max_j f_j(x)`.
//!
//! The search direction comes from a quadratic program over the probability
//! simplex; a normalized direction is combined with Armijo backtracking.
//! Core math is generic over the scalar type; the `*64` aliases below are
//! the concrete types the CLI and most callers use.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod linalg;
pub mod objective;
pub mod problems;
pub mod scalar;
pub mod simplex_qp;
pub mod solver;

pub use error::{MinimaxError, Result};
pub use objective::{
    active_set, check_gradients, default_active_tol, default_fd_step, directional_derivative,
    phi, snapshot, ActiveSet, EvalSnapshot, FnFamily, GradCheckReport, ObjectiveFamily,
};
pub use scalar::Scalar;
pub use simplex_qp::{
    brute_force_qp, fw_gap, primal_from_dual, project_simplex, solve_simplex_qp,
    solve_simplex_qp_warm, PrimalCertificate, QpSolution,
};
pub use solver::{
    direction, line_search, solve, stationarity_measure, step, SolveResult, SolveStatus,
    SolverConfig, StepStatus, TraceRecord,
};

// Concrete double-precision aliases.
pub type Mat64 = linalg::Mat<f64>;
pub type Snapshot64 = objective::EvalSnapshot<f64>;
pub type ActiveSet64 = objective::ActiveSet<f64>;
pub type FnFamily64 = objective::FnFamily<f64>;
pub type QpSolution64 = simplex_qp::QpSolution<f64>;
pub type PrimalCertificate64 = simplex_qp::PrimalCertificate<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type TraceRecord64 = solver::TraceRecord<f64>;
pub type SolveResult64 = solver::SolveResult<f64>;
pub type GroupedDataset64 = problems::GroupedDataset<f64>;
pub type QuadraticFamily64 = problems::QuadraticFamily<f64>;
pub type MaxMeanFamily64 = problems::MaxMeanFamily<f64>;

// Single-precision aliases for callers that want them.
pub type SolverConfig32 = solver::SolverConfig<f32>;
pub type SolveResult32 = solver::SolveResult<f32>;
