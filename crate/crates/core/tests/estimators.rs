mod common;

use common::*;
use vargibbs::estimators::{
    build_system, grid_system, pooled_estimate, sandwich_covariance, shift_invariant_system, solve, EmpiricalSystem, Formula,
    ParameterSpace, SystemOptions, Variant,
};
use vargibbs::geometry::{Configuration, Window};
use vargibbs::models::{sigma_epsilon_jacobian, GibbsModel, PotentialBasis, SigmaEpsilon, Taper};
use vargibbs::sampler::{derive_seed, simulate, SamplerConfig};
use vargibbs::Error;

fn lj() -> PotentialBasis {
    PotentialBasis::lennard_jones(RANGE)
}

fn moderate_pattern(side: f64, rep: u64) -> Configuration {
    let model = GibbsModel::new(lj(), SigmaEpsilon::new(0.1, 0.5).to_theta().to_vec(), 100.0).unwrap();
    let steps = (500_000.0 * (side / 2.0f64).powi(2)) as u64;
    let cfg = SamplerConfig { seed: derive_seed(side.to_bits(), rep), steps, ..SamplerConfig::default() };
    simulate(&model, &Window::cube(2, side).unwrap(), &cfg).unwrap()
}

fn system(a: [f64; 4], b: [f64; 2]) -> EmpiricalSystem {
    EmpiricalSystem {
        p: 2,
        a: a.to_vec(),
        b: b.to_vec(),
        points_used: 1,
        total_points: 1,
        volume: 4.0,
        variant: Variant::ShiftInvariant,
        formula: Formula::Simplified,
        space: ParameterSpace::LennardJones,
    }
}

#[test]
fn identity_system_returns_the_right_hand_side() {
    let est = solve(&system([1.0, 0.0, 0.0, 1.0], [2e-12, -2e-6])).unwrap();
    assert_eq!(est.theta, vec![2e-12, -2e-6]);
    assert!(est.valid);
    let se = est.sigma_epsilon.unwrap();
    assert!((se.sigma - 0.1).abs() < 1e-12 && (se.epsilon - 0.5).abs() < 1e-12);
}

#[test]
fn zero_matrix_is_singular() {
    assert!(matches!(solve(&system([0.0; 4], [1.0, 1.0])), Err(Error::SingularSystem { .. })));
}

#[test]
fn pooling_one_system_equals_solving_it() {
    let config = moderate_pattern(2.0, 0);
    let sys = grid_system(&config, &lj(), &Taper::One, 0.2, &SystemOptions::default()).unwrap();
    assert_eq!(pooled_estimate(std::slice::from_ref(&sys)).unwrap().theta, solve(&sys).unwrap().theta);
}

#[test]
fn single_point_gives_a_degenerate_system() {
    let config = Configuration::from_flat(Window::cube(2, 2.0).unwrap(), vec![1.0, 1.0]).unwrap();
    let sys = shift_invariant_system(&config, &lj(), &Taper::One, &SystemOptions::default()).unwrap();
    assert!(sys.is_degenerate());
    assert!(solve(&sys).is_err());
}

#[test]
fn points_on_cell_boundaries_do_not_contribute_to_a() {
    let window = Window::cube(2, 2.0).unwrap();
    let config = Configuration::from_flat(window, vec![0.4, 0.97, 0.49, 1.0]).unwrap();
    let sys = grid_system(&config, &lj(), &Taper::One, 0.2, &SystemOptions::default()).unwrap();
    assert!(sys.a.iter().all(|v| *v == 0.0));
    // the taper gradient still acts at the boundary
    assert!(sys.b.iter().any(|v| *v != 0.0));
}

#[test]
fn isolated_pair_inside_one_cell_weights_by_the_taper() {
    let window = Window::cube(2, 2.0).unwrap();
    let (x, y) = ([0.45, 1.05], [0.52, 1.1]);
    let config = Configuration::from_flat(window.clone(), vec![x[0], x[1], y[0], y[1]]).unwrap();
    let sys = grid_system(&config, &lj(), &Taper::One, 0.2, &SystemOptions::default()).unwrap();
    let s = dist2(&x, &y);
    let phi = lj_phi(s, RANGE);
    let (wx, gx) = brute_cell_taper(&x, &[0.0, 0.0], 0.2);
    let (wy, gy) = brute_cell_taper(&y, &[0.0, 0.0], 0.2);
    for i in 0..2 {
        for j in 0..2 {
            let expected = (wx + wy) * 4.0 * s * phi[i].1 * phi[j].1;
            assert!(rel_err(sys.a[i * 2 + j], expected, 0.0) < 1e-12);
        }
        let lap = 2.0 * 2.0 * phi[i].1 + 4.0 * s * phi[i].2;
        let grad_term = |g: &[f64], p: &[f64], q: &[f64]| (0..2).map(|k| g[k] * 2.0 * (p[k] - q[k]) * phi[i].1).sum::<f64>();
        let expected = (wx + wy) * lap + grad_term(&gx, &x, &y) + grad_term(&gy, &y, &x);
        assert!(rel_err(sys.b[i], expected, 0.0) < 1e-12);
    }
}

#[test]
fn simplified_matrix_is_symmetric() {
    let config = moderate_pattern(2.0, 1);
    for variant in [Variant::ShiftInvariant, Variant::Grid { cell_side: 0.2 }] {
        let sys = build_system(&config, &lj(), &Taper::One, variant, &SystemOptions::default()).unwrap();
        assert_eq!(sys.a[1], sys.a[2]);
    }
}

#[test]
fn grid_rejects_indivisible_windows() {
    let config = moderate_pattern(2.0, 2);
    assert!(matches!(grid_system(&config, &lj(), &Taper::One, 0.3, &SystemOptions::default()), Err(Error::IndivisibleWindow { .. })));
    assert!(grid_system(&config, &lj(), &Taper::One, -0.2, &SystemOptions::default()).is_err());
}

#[test]
fn estimates_are_invariant_under_translation_and_reflection() {
    let config = moderate_pattern(2.0, 3);
    for variant in [Variant::ShiftInvariant, Variant::Grid { cell_side: 0.2 }] {
        for formula in [Formula::Simplified, Formula::Raw] {
            let opts = SystemOptions { formula, border: None };
            let fit = |c: &Configuration| solve(&build_system(c, &lj(), &Taper::One, variant, &opts).unwrap()).unwrap().theta;
            let base = fit(&config);
            for other in [fit(&config.translated(&[3.7, -1.25])), fit(&config.reflected())] {
                for k in 0..2 {
                    assert!(rel_err(base[k], other[k], 0.0) < 1e-9, "{variant:?} {formula:?}: {base:?} vs {other:?}");
                }
            }
        }
    }
}

#[test]
fn border_erosion_drops_points_near_the_edge() {
    let config = moderate_pattern(2.0, 4);
    let all = shift_invariant_system(&config, &lj(), &Taper::One, &SystemOptions::default()).unwrap();
    let inner = shift_invariant_system(&config, &lj(), &Taper::One, &SystemOptions { border: Some(RANGE), ..Default::default() }).unwrap();
    let expected = config.points().filter(|x| config.window().distance_to_boundary(x) >= RANGE).count();
    assert_eq!(all.points_used, config.len());
    assert_eq!(inner.points_used, expected);
    assert!(inner.points_used < all.points_used);
}

#[test]
fn sums_reference_only_geometry_and_basis() {
    // the same pattern is what it is, whatever activity generated it
    let config = moderate_pattern(2.0, 5);
    let a = build_system(&config, &lj(), &Taper::One, Variant::ShiftInvariant, &SystemOptions::default()).unwrap();
    let b = build_system(&config.clone(), &lj(), &Taper::One, Variant::ShiftInvariant, &SystemOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn estimating_equation_residual_shrinks_with_the_window() {
    let theta = SigmaEpsilon::new(0.1, 0.5).to_theta();
    let mut mean_residual = Vec::new();
    for side in [2.0, 4.0] {
        let r: Vec<f64> = (0..6)
            .map(|rep| {
                let sys = grid_system(&moderate_pattern(side, rep), &lj(), &Taper::One, 0.2, &SystemOptions::default()).unwrap();
                let res: Vec<f64> = (0..2).map(|i| sys.a[i * 2] * theta[0] + sys.a[i * 2 + 1] * theta[1] - sys.b[i]).collect();
                (res.iter().map(|v| v * v).sum::<f64>() / sys.b.iter().map(|v| v * v).sum::<f64>()).sqrt()
            })
            .collect();
        mean_residual.push(mean(&r));
    }
    assert!(mean_residual[1] < mean_residual[0], "{mean_residual:?}");
}

#[test]
fn estimation_error_shrinks_across_window_sizes() {
    let truth = SigmaEpsilon::new(0.1, 0.5).to_theta();
    let mut errors = Vec::new();
    for (side, reps) in [(2.0, 16), (4.0, 8), (8.0, 4)] {
        let e: Vec<f64> = (0..reps)
            .map(|rep| {
                let sys = grid_system(&moderate_pattern(side, rep), &lj(), &Taper::One, 0.2, &SystemOptions::default()).unwrap();
                let theta = solve(&sys).unwrap().theta;
                (0..2).map(|k| ((theta[k] - truth[k]) / truth[k]).abs()).sum::<f64>()
            })
            .collect();
        errors.push(mean(&e));
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn sandwich_covariance_tracks_the_monte_carlo_spread() {
    let basis = lj();
    let mut sigmas = Vec::new();
    let mut implied = Vec::new();
    for rep in 0..40 {
        let config = moderate_pattern(2.0, 100 + rep);
        let opts = SystemOptions::default();
        let est = solve(&grid_system(&config, &basis, &Taper::One, 0.2, &opts).unwrap()).unwrap();
        let Some(se) = est.sigma_epsilon else { continue };
        let cov = sandwich_covariance(&config, &basis, &Taper::One, 0.2, &opts, &est.theta, RANGE).unwrap();
        let j = sigma_epsilon_jacobian(&est.theta);
        let var: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| j[0][a] * cov.theta[a * 2 + b] * j[0][b]).sum();
        sigmas.push(se.sigma);
        implied.push(var.sqrt());
    }
    // the implied standard error is right-skewed across replicates; compare its average
    let mc = sd(&sigmas);
    let average = mean(&implied);
    assert!(average > mc / 2.0 && average < mc * 2.0, "implied {average} vs Monte Carlo {mc}");
}

#[test]
fn sandwich_covariance_of_an_empty_pattern_is_zero() {
    let config = Configuration::empty(Window::cube(2, 2.0).unwrap());
    let cov = sandwich_covariance(&config, &lj(), &Taper::One, 0.2, &SystemOptions::default(), &[1e-12, -1e-6], RANGE).unwrap();
    assert!(cov.theta.iter().chain(&cov.sigma).all(|v| *v == 0.0));
    let small = Configuration::empty(Window::cube(2, 0.4).unwrap());
    assert!(matches!(
        sandwich_covariance(&small, &lj(), &Taper::One, 0.2, &SystemOptions::default(), &[1e-12, -1e-6], RANGE),
        Err(Error::InsufficientCells { .. })
    ));
}
