//! Lagrangian numerics for the Camassa-Holm equation on the real line.
//!
//! The solution is carried as a flow `eta = id + v` of particle trajectories
//! together with the Lagrangian velocity `U = eta_t`; both live in the
//! `C1 ∩ H1` setting and are sampled with explicit derivative channels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod convergence;
pub mod diffeo;
pub mod error;
pub mod eulerian;
pub mod exec;
pub mod field;
pub mod grid;
pub mod io;
pub mod lagrangian;
pub mod operators;
pub mod sample;

pub use diffeo::{comp1, comp2, distance, invert, modulus_estimate, Diffeo};
pub use error::{Error, Result};
pub use eulerian::{compare, integrate_eulerian, EulerianOracle, EulerianState, EulerianTrajectory, SolutionHistory};
pub use exec::Execution;
pub use field::{NormComponents, ScalarField0, ScalarField1};
pub use grid::Grid;
pub use lagrangian::{
    conserved_quantities, integrate, quadratic_source, reconstruct_u, FlowState, LagrangianSolver, SolverOptions,
    Trajectory,
};
pub use operators::{gateaux_df, inv_helmholtz, l_eta_conjugated, l_eta_direct, l_op, OperatorWorkspace, Quadrature};
