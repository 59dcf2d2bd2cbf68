//! Numerical laboratory for the two classical actions of a non-relativistic
//! particle: the endpoint-conditioned boundary-value action and the
//! initial-data-conditioned field action. Four independent routes compute
//! them — closed forms for the uniform-force family, shooting on the
//! equations of motion, direct minimization of discretized paths, min-plus
//! (Hopf-Lax) minimization over initial positions, and a finite-difference
//! Hamilton-Jacobi grid solver — and the crate cross-validates them against
//! one another.

pub mod error;
pub mod euler_lagrange;
pub mod hj_pde;
pub mod hopf_lax;
pub mod model;
pub mod pilot;
pub mod trajectory;
mod vecmath;

pub use error::{Error, Result};
pub use euler_lagrange::{
    el_action_direct, initial_velocity, solve_bvp_shooting, trajectory_family, BvpSolution,
    DirectMinimization, FamilyMember,
};
pub use hj_pde::{pde_residual, sample_initial_action, solve_hj_pde, solve_hj_pde_with, ActionField, SpatialGrid};
pub use hopf_lax::{
    classical_action, hj_action_hopf_lax, hj_action_nested, minimizing_trajectory, HopfLaxResult,
    InitialAction, NestedResult,
};
pub use model::{
    analytic_el_action_linear, analytic_hj_action_linear, analytic_initial_velocity,
    analytic_optimal_trajectory_linear, ModelSpec, PotentialSpec,
};
pub use pilot::{
    field_constancy_report, integrate_pilot_trajectory, velocity_field, VelocityFieldView,
};
pub use trajectory::Trajectory;
