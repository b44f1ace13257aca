//! Maximum pseudolikelihood via the Berman-Turner quadrature device: the log
//! pseudolikelihood becomes a weighted Poisson log-likelihood over data and dummy nodes.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{finish, EstimateResult, Method, ParameterSpace};
use crate::geometry::{CellIndex, Configuration};
use crate::models::{local_energy_basis, PotentialBasis};

pub const DEFAULT_GRID_RES: usize = 128;
pub const MAX_ITERATIONS: usize = 100;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;
/// Relative Newton decrement below which the objective cannot improve in double precision.
pub const DECREMENT_TOLERANCE: f64 = 1e-15;

/// Berman-Turner quadrature scheme with counting weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub dim: usize,
    pub p: usize,
    /// Node coordinates, point-major.
    pub nodes: Vec<f64>,
    pub is_data: Vec<bool>,
    pub weights: Vec<f64>,
    /// Sufficient statistics `h^i(u, omega \ u) / scale_i`, row-major `nodes x p`.
    pub stats: Vec<f64>,
    /// Per-component factor converting statistics to the rescaled distance unit.
    pub scale: Vec<f64>,
    /// Dummy nodes discarded because they fall inside a hard core.
    pub dropped_dummies: usize,
    pub volume: f64,
    pub space: ParameterSpace,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn data_count(&self) -> usize {
        self.is_data.iter().filter(|d| **d).count()
    }

    pub fn stat(&self, node: usize) -> &[f64] {
        &self.stats[node * self.p..(node + 1) * self.p]
    }
}

/// Dummy nodes at the centers of an `m^d` grid; each node in a grid cell (the dummy and
/// any data points) gets weight `cell volume / (1 + data points in the cell)`.
/// Distances are measured in units of `unit` when computing the statistics.
pub fn build_quadrature(config: &Configuration, basis: &PotentialBasis, grid_res: usize, unit: f64) -> Result<Quadrature> {
    if grid_res < 8 {
        return Err(Error::InvalidModel(format!("quadrature grid resolution must be at least 8, got {grid_res}")));
    }
    if !(unit > 0.0) {
        return Err(Error::InvalidModel(format!("distance unit must be positive, got {unit}")));
    }
    let d = config.dim();
    let p = basis.len();
    let window = config.window();
    let side: Vec<f64> = (0..d).map(|k| window.extent(k) / grid_res as f64).collect();
    let cell_volume: f64 = side.iter().product();
    let ncells = grid_res.pow(d as u32);
    let cell_of = |x: &[f64]| -> usize {
        let mut id = 0;
        let mut stride = 1;
        for k in 0..d {
            let c = (((x[k] - window.lower()[k]) / side[k]).floor().max(0.0) as usize).min(grid_res - 1);
            id += c * stride;
            stride *= grid_res;
        }
        id
    };
    let mut counts = vec![0usize; ncells];
    for x in config.points() {
        counts[cell_of(x)] += 1;
    }

    let mut nodes = Vec::with_capacity((config.len() + ncells) * d);
    let mut is_data = Vec::with_capacity(config.len() + ncells);
    let mut weights = Vec::with_capacity(config.len() + ncells);
    for x in config.points() {
        nodes.extend_from_slice(x);
        is_data.push(true);
        weights.push(cell_volume / (1 + counts[cell_of(x)]) as f64);
    }
    for c in 0..ncells {
        let mut rem = c;
        for k in 0..d {
            let ck = rem % grid_res;
            rem /= grid_res;
            nodes.push(window.lower()[k] + (ck as f64 + 0.5) * side[k]);
        }
        is_data.push(false);
        weights.push(cell_volume / (1 + counts[c]) as f64);
    }

    let index = CellIndex::build(config, basis.range())?;
    let scale = basis.unit_scale(unit);
    let ndata = config.len();
    let raw: Vec<Vec<f64>> = (0..is_data.len())
        .into_par_iter()
        .map(|j| {
            let x = &nodes[j * d..(j + 1) * d];
            let skip = if j < ndata { Some(j) } else { None };
            let mut h = local_energy_basis(basis, &index, x, skip);
            for (v, c) in h.iter_mut().zip(&scale) {
                *v /= c;
            }
            h
        })
        .collect();

    let mut q = Quadrature {
        dim: d,
        p,
        nodes: Vec::with_capacity(nodes.len()),
        is_data: Vec::with_capacity(is_data.len()),
        weights: Vec::with_capacity(weights.len()),
        stats: Vec::with_capacity(raw.len() * p),
        scale,
        dropped_dummies: 0,
        volume: window.volume(),
        space: ParameterSpace::for_basis(basis),
    };
    for (j, h) in raw.into_iter().enumerate() {
        if !is_data[j] && h.iter().any(|v| v.is_infinite()) {
            q.dropped_dummies += 1;
            continue;
        }
        q.nodes.extend_from_slice(&nodes[j * d..(j + 1) * d]);
        q.is_data.push(is_data[j]);
        q.weights.push(weights[j]);
        q.stats.extend(h);
    }
    Ok(q)
}

/// Pseudolikelihood fit in the rescaled parametrisation, `beta = (log-intercept, theta')`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpleFit {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

fn log_lambda(q: &Quadrature, beta: &[f64], j: usize) -> f64 {
    beta[0] - q.stat(j).iter().zip(&beta[1..]).map(|(s, t)| s * t).sum::<f64>()
}

fn objective(q: &Quadrature, beta: &[f64]) -> f64 {
    let mut total = 0.0;
    for j in 0..q.len() {
        let eta = log_lambda(q, beta, j);
        if q.is_data[j] {
            total += eta;
        }
        total -= q.weights[j] * eta.exp();
    }
    total
}

/// Weighted Poisson score `sum_j w_j (y_j - lambda_j) (1, -S_j)` and the negated Hessian.
fn score_and_information(q: &Quadrature, beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = q.p + 1;
    let mut grad = vec![0.0; m];
    let mut info = vec![0.0; m * m];
    let mut x = vec![0.0; m];
    for j in 0..q.len() {
        x[0] = 1.0;
        for (xi, s) in x[1..].iter_mut().zip(q.stat(j)) {
            *xi = -s;
        }
        let lam = log_lambda(q, beta, j).exp();
        let wl = q.weights[j] * lam;
        let resid = if q.is_data[j] { 1.0 } else { 0.0 } - wl;
        for a in 0..m {
            grad[a] += resid * x[a];
            if wl != 0.0 {
                for b in 0..m {
                    info[a * m + b] += wl * x[a] * x[b];
                }
            }
        }
    }
    (grad, info)
}

pub fn score(q: &Quadrature, beta: &[f64]) -> Vec<f64> {
    score_and_information(q, beta).0
}

/// Damped Newton ascent on the Berman-Turner log pseudolikelihood.
pub fn fit_beta(q: &Quadrature) -> Result<MpleFit> {
    let n = q.data_count();
    if n == 0 {
        return Err(Error::Empty("pseudolikelihood needs at least one data point".into()));
    }
    for j in 0..q.len() {
        if q.is_data[j] && q.stat(j).iter().any(|v| v.is_infinite()) {
            return Err(Error::InfeasibleData { index: j });
        }
    }
    let m = q.p + 1;
    let mut beta = vec![0.0; m];
    beta[0] = (n as f64 / q.volume).ln();
    // Start on the repulsive side: from theta = 0 the Hessian is dominated by dummies
    // sitting on top of data points and Newton crawls towards the optimum.
    if q.space == ParameterSpace::LennardJones {
        beta[1] = 1.0;
        beta[2] = -1.0;
    }
    let mut current = objective(q, &beta);
    for iter in 0..MAX_ITERATIONS {
        let (grad, info) = score_and_information(q, &beta);
        let gnorm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if gnorm < GRADIENT_TOLERANCE {
            return Ok(MpleFit { beta, iterations: iter, gradient_norm: gnorm });
        }
        // equilibrate before factorising: the statistics span many orders of magnitude
        let scale: Vec<f64> = (0..m).map(|a| info[a * m + a].sqrt().max(f64::MIN_POSITIVE)).collect();
        let h = DMatrix::from_fn(m, m, |a, b| info[a * m + b] / (scale[a] * scale[b]));
        let g = DVector::from_fn(m, |a, _| grad[a] / scale[a]);
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => match h.lu().solve(&g) {
                Some(s) => s,
                None => break,
            },
        };
        let direction: Vec<f64> = (0..m).map(|a| step[a] / scale[a]).collect();
        // Newton decrement: predicted objective gain of the full step
        let decrement: f64 = (0..m).map(|a| step[a] * g[a]).sum();
        if decrement.abs() < DECREMENT_TOLERANCE * current.abs().max(1.0) {
            return Ok(MpleFit { beta, iterations: iter, gradient_norm: gnorm });
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = beta.iter().zip(&direction).map(|(b, d)| b + t * d).collect();
            let value = objective(q, &trial);
            if value.is_finite() && value >= current {
                beta = trial;
                current = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (grad, _) = score_and_information(q, &beta);
    let gnorm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    if gnorm < GRADIENT_TOLERANCE {
        return Ok(MpleFit { beta, iterations: MAX_ITERATIONS, gradient_norm: gnorm });
    }
    Err(Error::Diverged { iterations: MAX_ITERATIONS, last: beta })
}

/// Fits the pseudolikelihood and maps the rescaled parameters back to the basis units.
pub fn fit_mple(q: &Quadrature) -> Result<EstimateResult> {
    let fit = fit_beta(q)?;
    let theta: Vec<f64> = fit.beta[1..].iter().zip(&q.scale).map(|(t, c)| t / c).collect();
    let (_, info) = score_and_information(q, &fit.beta);
    let m = q.p + 1;
    let scale: Vec<f64> = (0..m).map(|a| info[a * m + a].sqrt().max(f64::MIN_POSITIVE)).collect();
    let h = DMatrix::from_fn(m, m, |a, b| info[a * m + b] / (scale[a] * scale[b]));
    let sv = h.singular_values();
    let condition = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
    let mut result = finish(Method::Mple, theta, condition, q.space, q.data_count());
    result.log_intercept = Some(fit.beta[0]);
    Ok(result)
}
