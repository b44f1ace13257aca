//! Shared fixtures for the benchmarks.

use vargibbs::models::SigmaEpsilon;
use vargibbs::sampler::{simulate, SamplerConfig};
use vargibbs::{Configuration, GibbsModel, PotentialBasis, Window};

pub const SIGMA: f64 = 0.1;
pub const RANGE: f64 = 0.25;

pub fn lennard_jones(epsilon: f64) -> GibbsModel {
    let theta = SigmaEpsilon::new(SIGMA, epsilon).to_theta().to_vec();
    GibbsModel::new(PotentialBasis::lennard_jones(RANGE), theta, 100.0).expect("valid model")
}

pub fn sampler(steps: u64, seed: u64) -> SamplerConfig {
    SamplerConfig { steps, seed, move_scale: SIGMA / 2.0, ..SamplerConfig::default() }
}

/// A Lennard-Jones pattern on `[0, side]^2`, roughly at equilibrium.
pub fn pattern(epsilon: f64, side: f64, seed: u64) -> Configuration {
    let window = Window::cube(2, side).expect("valid window");
    let steps = (500_000.0 * (side / 2.0).powi(2)) as u64;
    simulate(&lennard_jones(epsilon), &window, &sampler(steps, seed)).expect("simulation")
}
