//! Block (per-cell) sandwich covariance for the grid estimator.

use serde::{Deserialize, Serialize};

use super::solve::sandwich;
use super::system::{check_grid, for_each_contribution, SystemOptions, Variant};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::models::{PotentialBasis, Taper};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDecomposition {
    pub cell_side: f64,
    pub shape: Vec<usize>,
    /// Residual statistic per cell, row-major `cells x p`.
    pub residuals: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichCovariance {
    /// Per-cell long-run covariance of the residuals.
    pub sigma: Vec<f64>,
    /// Limit covariance of `sqrt(|W|) (theta_hat - theta)`.
    pub asymptotic: Vec<f64>,
    /// Covariance of `theta_hat` for this window.
    pub theta: Vec<f64>,
    pub cells: CellDecomposition,
}

const MIN_CELLS_PER_AXIS: usize = 3;

/// Per-cell residuals `Y_u = sum_{x in cell u} [b(x) - A(x) theta]`.
pub fn cell_residuals(
    config: &Configuration,
    basis: &PotentialBasis,
    taper: &Taper,
    cell_side: f64,
    opts: &SystemOptions,
    theta: &[f64],
    radius: f64,
) -> Result<(CellDecomposition, Vec<f64>)> {
    check_grid(config, cell_side)?;
    let d = config.dim();
    let p = basis.len();
    let shape: Vec<usize> = (0..d).map(|k| (config.window().extent(k) / cell_side).round() as usize).collect();
    if let Some(&few) = shape.iter().find(|&&n| n < MIN_CELLS_PER_AXIS) {
        return Err(Error::InsufficientCells { needed: MIN_CELLS_PER_AXIS, got: few });
    }
    let mut strides = vec![1usize; d];
    for k in 1..d {
        strides[k] = strides[k - 1] * shape[k - 1];
    }
    let ncells: usize = shape.iter().product();
    let lower = config.window().lower().to_vec();
    let mut residuals = vec![0.0; ncells * p];
    let mut a_total = vec![0.0; p * p];
    for_each_contribution(config, basis, taper, Variant::Grid { cell_side }, opts, |_, x, a, b| {
        let cell: usize = (0..d)
            .map(|k| {
                let c = ((x[k] - lower[k]) / cell_side).floor().max(0.0) as usize;
                c.min(shape[k] - 1) * strides[k]
            })
            .sum();
        for i in 0..p {
            let fitted: f64 = (0..p).map(|j| a[i * p + j] * theta[j]).sum();
            residuals[cell * p + i] += b[i] - fitted;
        }
        for (acc, v) in a_total.iter_mut().zip(a) {
            *acc += v;
        }
    })?;
    Ok((CellDecomposition { cell_side, shape, residuals, radius }, a_total))
}

/// Cell offsets `v - u` whose cells come within `radius` of each other.
fn neighbor_offsets(d: usize, cell_side: f64, radius: f64) -> Vec<Vec<isize>> {
    let reach = (radius / cell_side).ceil() as isize + 1;
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|o: Vec<isize>| {
                (-reach..=reach).map(move |s| {
                    let mut next = o.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out.retain(|o| {
        let gap2: f64 = o.iter().map(|&s| ((s.abs() - 1).max(0) as f64 * cell_side).powi(2)).sum();
        gap2 <= radius * radius
    });
    out
}

/// `Sigma_hat = (1/#cells) sum_u sum_{v in V_u} Y_u Y_v^T` with `V_u` the cells within `radius`.
pub fn cell_sigma(cells: &CellDecomposition, p: usize) -> Vec<f64> {
    let d = cells.shape.len();
    let ncells: usize = cells.shape.iter().product();
    let mut strides = vec![1usize; d];
    for k in 1..d {
        strides[k] = strides[k - 1] * cells.shape[k - 1];
    }
    let offsets = neighbor_offsets(d, cells.cell_side, cells.radius);
    let mut sigma = vec![0.0; p * p];
    let mut coord = vec![0usize; d];
    for u in 0..ncells {
        let mut rem = u;
        for k in (0..d).rev() {
            coord[k] = rem / strides[k];
            rem %= strides[k];
        }
        let yu = &cells.residuals[u * p..(u + 1) * p];
        'offsets: for off in &offsets {
            let mut v = 0usize;
            for k in 0..d {
                let c = coord[k] as isize + off[k];
                if c < 0 || c >= cells.shape[k] as isize {
                    continue 'offsets;
                }
                v += c as usize * strides[k];
            }
            let yv = &cells.residuals[v * p..(v + 1) * p];
            for i in 0..p {
                for j in 0..p {
                    sigma[i * p + j] += yu[i] * yv[j];
                }
            }
        }
    }
    sigma.iter_mut().for_each(|s| *s /= ncells as f64);
    sigma
}

/// Sandwich covariance of the grid estimate `theta_hat`.
///
/// With `A` the unnormalised matrix and `M = #cells * Sigma_hat`, the covariance of
/// `theta_hat` is `A^-1 M A^-1`; the asymptotic form scales it by the window volume.
pub fn sandwich_covariance(
    config: &Configuration,
    basis: &PotentialBasis,
    taper: &Taper,
    cell_side: f64,
    opts: &SystemOptions,
    theta_hat: &[f64],
    radius: f64,
) -> Result<SandwichCovariance> {
    let p = basis.len();
    let (cells, a) = cell_residuals(config, basis, taper, cell_side, opts, theta_hat, radius)?;
    let sigma = cell_sigma(&cells, p);
    let ncells = cells.shape.iter().product::<usize>() as f64;
    let volume = config.window().volume();
    if sigma.iter().all(|v| *v == 0.0) {
        return Ok(SandwichCovariance { sigma, asymptotic: vec![0.0; p * p], theta: vec![0.0; p * p], cells });
    }
    let middle: Vec<f64> = sigma.iter().map(|s| s * ncells).collect();
    let theta = sandwich(&a, &middle, p, "grid covariance")?;
    let asymptotic = theta.iter().map(|v| v * volume).collect();
    Ok(SandwichCovariance { sigma, asymptotic, theta, cells })
}
