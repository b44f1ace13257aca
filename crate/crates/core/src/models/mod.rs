//! Pair-potential bases, Gibbs model energies and the analytic spatial derivatives
//! used by the estimating equations.

mod basis;
mod lennard_jones;
mod local;
mod model;
mod spec;
mod taper;

pub use basis::{PairTerms, PotentialBasis};
pub use lennard_jones::{sigma_epsilon_jacobian, theta_is_valid, InvalidTheta, SigmaEpsilon};
pub use local::{
    div_div_h_basis, div_h_basis, grad_h_basis, laplacian_h_basis, local_energy, local_energy_basis, LocalTerms,
};
pub use model::{total_energy, total_energy_basis, GibbsModel};
pub use spec::{BasisKind, ModelSpec, ThetaSpec, DEFAULT_RANGE_IN_SIGMA};
pub use taper::{cell_taper, chi, grad_psi_hardcore, psi_hardcore, Taper};
