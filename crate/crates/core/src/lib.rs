//! Variational estimation for pairwise Gibbs point processes.
//!
//! The crate simulates Gibbs patterns with a Metropolis-Hastings sampler, builds the
//! linear estimating equations of the shift-invariant and grid variational estimators,
//! fits a pseudolikelihood baseline and runs replicated studies over all of them.

pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod models;
pub mod mple;
pub mod sampler;

pub use error::{Error, Result};
pub use estimators::{build_system, pooled_estimate, solve, EmpiricalSystem, EstimateResult, Formula, Method, SystemOptions, Variant};
pub use geometry::{CellIndex, Configuration, Point, Window};
pub use harness::{run_experiment, summarize, ExperimentPlan, ExperimentReport, EstimatorSpec};
pub use models::{GibbsModel, ModelSpec, PotentialBasis, SigmaEpsilon, Taper};
pub use sampler::{simulate, SamplerConfig};
