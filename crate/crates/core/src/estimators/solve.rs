use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::system::{EmpiricalSystem, Formula, ParameterSpace, Variant};
use crate::error::{Error, Result};
use crate::models::SigmaEpsilon;

/// Systems whose equilibrated condition number exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Estimation method that produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Variational { variant: Variant, formula: Formula },
    /// Variational, solved from averaged systems.
    Pooled { variant: Variant, formula: Formula },
    Mple,
}

impl Method {
    pub fn tag(&self) -> String {
        match self {
            Method::Variational { variant, .. } => variant.tag().to_string(),
            Method::Pooled { variant, .. } => format!("{}-pooled", variant.tag()),
            Method::Mple => "mple".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub method: Method,
    pub theta: Vec<f64>,
    /// Present when the estimate lies in the Lennard-Jones parameter space.
    pub sigma_epsilon: Option<SigmaEpsilon>,
    pub valid: bool,
    /// 2-norm condition number of the symmetrically equilibrated system matrix.
    pub condition: f64,
    /// Covariance of `theta` (row-major `p x p`), when requested.
    pub covariance: Option<Vec<f64>>,
    /// Log-intercept of the pseudolikelihood fit (absorbs `log z`).
    pub log_intercept: Option<f64>,
    pub points: usize,
}

/// Solution of a small dense system with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    pub condition: f64,
}

/// Solves `A x = b` after symmetric diagonal equilibration `D^-1 A D^-1`, `D = sqrt|diag A|`.
///
/// The raw matrices mix entries of very different magnitudes (`s^-14` against `s^-8`),
/// so the condition number is reported for the equilibrated matrix.
pub fn solve_dense(a: &[f64], b: &[f64], label: &str) -> Result<DenseSolution> {
    let p = b.len();
    let singular = |condition: f64| Error::SingularSystem { variant: label.to_string(), condition };
    if a.len() != p * p || p == 0 {
        return Err(Error::DimensionMismatch { expected: p * p, got: a.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(singular(f64::INFINITY));
    }
    let scale: Vec<f64> = (0..p).map(|i| a[i * p + i].abs().sqrt()).collect();
    if scale.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return Err(singular(f64::INFINITY));
    }
    let m = DMatrix::from_fn(p, p, |i, j| a[i * p + j] / (scale[i] * scale[j]));
    let rhs = DVector::from_fn(p, |i, _| b[i] / scale[i]);

    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(singular(condition));
    }
    let y = m.lu().solve(&rhs).ok_or_else(|| singular(condition))?;
    Ok(DenseSolution { x: (0..p).map(|i| y[i] / scale[i]).collect(), condition })
}

/// `A^-1 M A^-T` for row-major `A` and `M`.
pub(crate) fn sandwich(a: &[f64], middle: &[f64], p: usize, label: &str) -> Result<Vec<f64>> {
    let am = DMatrix::from_row_slice(p, p, a);
    let inv = am.clone().try_inverse().ok_or_else(|| Error::SingularSystem { variant: label.to_string(), condition: f64::INFINITY })?;
    let mm = DMatrix::from_row_slice(p, p, middle);
    let out = &inv * mm * inv.transpose();
    Ok((0..p * p).map(|k| out[(k / p, k % p)]).collect())
}

pub(crate) fn finish(method: Method, theta: Vec<f64>, condition: f64, space: ParameterSpace, points: usize) -> EstimateResult {
    let valid = space.contains(&theta);
    let sigma_epsilon = match space {
        ParameterSpace::LennardJones => SigmaEpsilon::from_theta(&theta).ok(),
        ParameterSpace::Unconstrained => None,
    };
    EstimateResult { method, theta, sigma_epsilon, valid, condition, covariance: None, log_intercept: None, points }
}

/// `theta = A^-1 b`.
pub fn solve(system: &EmpiricalSystem) -> Result<EstimateResult> {
    let label = format!("{}/{}", system.variant.tag(), system.formula.tag());
    let sol = solve_dense(&system.a, &system.b, &label)?;
    Ok(finish(
        Method::Variational { variant: system.variant, formula: system.formula },
        sol.x,
        sol.condition,
        system.space,
        system.points_used,
    ))
}

/// Averages `A` and `b` over systems, then solves.
pub fn pooled_estimate(systems: &[EmpiricalSystem]) -> Result<EstimateResult> {
    let first = systems.first().ok_or_else(|| Error::Empty("no systems to pool".into()))?;
    let p = first.p;
    let mut a = vec![0.0; p * p];
    let mut b = vec![0.0; p];
    for s in systems {
        if s.p != p {
            return Err(Error::DimensionMismatch { expected: p, got: s.p });
        }
        for (acc, v) in a.iter_mut().zip(&s.a) {
            *acc += v;
        }
        for (acc, v) in b.iter_mut().zip(&s.b) {
            *acc += v;
        }
    }
    let n = systems.len() as f64;
    a.iter_mut().for_each(|v| *v /= n);
    b.iter_mut().for_each(|v| *v /= n);
    let label = format!("pooled {}/{}", first.variant.tag(), first.formula.tag());
    let sol = solve_dense(&a, &b, &label)?;
    let points = systems.iter().map(|s| s.points_used).sum();
    Ok(finish(Method::Pooled { variant: first.variant, formula: first.formula }, sol.x, sol.condition, first.space, points))
}
