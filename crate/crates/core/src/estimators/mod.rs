//! Variational estimators: linear estimating equations `A theta = b` built from
//! first and second spatial derivatives of the local energies.

mod covariance;
mod solve;
mod system;

pub use covariance::{cell_residuals, cell_sigma, sandwich_covariance, CellDecomposition, SandwichCovariance};
pub use solve::{pooled_estimate, solve, solve_dense, DenseSolution, EstimateResult, Method, MAX_CONDITION};
pub use system::{
    build_system, grid_system, shift_invariant_system, EmpiricalSystem, Formula, ParameterSpace, SystemOptions, Variant,
};

pub(crate) use solve::finish;
