use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellIndex, Configuration};
use crate::models::{cell_taper, LocalTerms, PotentialBasis, Taper};

/// Which test-function family the estimating equations use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Variant {
    /// `g_i = Psi div h^i` summed over the whole window.
    ShiftInvariant,
    /// `g_i = psi Psi div h^i` with `psi` the cell taper of a grid of side `cell_side`.
    Grid { cell_side: f64 },
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::ShiftInvariant => "invariant",
            Variant::Grid { .. } => "grid",
        }
    }
}

/// `Simplified` keeps only same-axis products (`grad h^i . grad h^j`, Laplacian);
/// `Raw` uses divergences throughout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    #[default]
    Simplified,
    Raw,
}

impl Formula {
    pub fn tag(&self) -> &'static str {
        match self {
            Formula::Simplified => "simplified",
            Formula::Raw => "raw",
        }
    }
}

/// Region in which estimates count as valid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterSpace {
    /// `theta_1 > 0, theta_2 < 0`.
    LennardJones,
    Unconstrained,
}

impl ParameterSpace {
    pub fn for_basis(basis: &PotentialBasis) -> Self {
        match basis {
            PotentialBasis::LennardJones { .. } => ParameterSpace::LennardJones,
            PotentialBasis::HardSphere { .. } => ParameterSpace::Unconstrained,
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        match self {
            ParameterSpace::LennardJones => crate::models::theta_is_valid(theta),
            ParameterSpace::Unconstrained => theta.iter().all(|t| t.is_finite()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemOptions {
    pub formula: Formula,
    /// Only points at least this far from the window boundary enter the outer sums.
    pub border: Option<f64>,
}

/// Unnormalised empirical matrix `A` (row-major `p x p`) and vector `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSystem {
    pub p: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Points that passed the border filter.
    pub points_used: usize,
    /// Points in the configuration.
    pub total_points: usize,
    pub volume: f64,
    pub variant: Variant,
    pub formula: Formula,
    pub space: ParameterSpace,
}

impl EmpiricalSystem {
    pub fn a_entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.p + j]
    }

    /// All entries zero: no point had an interacting neighbor.
    pub fn is_degenerate(&self) -> bool {
        self.a.iter().all(|v| *v == 0.0) && self.b.iter().all(|v| *v == 0.0)
    }

    /// `(A / N, b / N)` with `N` the point count.
    pub fn per_point(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.points_used.max(1) as f64;
        (self.a.iter().map(|v| v / n).collect(), self.b.iter().map(|v| v / n).collect())
    }

    /// `(A / |W|, b / |W|)`.
    pub fn per_volume(&self) -> (Vec<f64>, Vec<f64>) {
        (self.a.iter().map(|v| v / self.volume).collect(), self.b.iter().map(|v| v / self.volume).collect())
    }
}

/// Streams each contributing point's `(id, point, A contribution, b contribution)`.
pub(crate) fn for_each_contribution(
    config: &Configuration,
    basis: &PotentialBasis,
    taper: &Taper,
    variant: Variant,
    opts: &SystemOptions,
    mut sink: impl FnMut(usize, &[f64], &[f64], &[f64]),
) -> Result<usize> {
    let d = config.dim();
    let p = basis.len();
    if let Variant::Grid { cell_side } = variant {
        check_grid(config, cell_side)?;
    }
    let radius = basis.range().max(taper.reach());
    let index = CellIndex::build(config, radius)?;
    let origin = config.window().lower().to_vec();

    let mut terms = LocalTerms::new(p, d);
    let mut grad_w = vec![0.0; d];
    let mut grad_taper = vec![0.0; d];
    let mut a = vec![0.0; p * p];
    let mut b = vec![0.0; p];
    let mut used = 0;
    for (id, x) in config.points().enumerate() {
        if let Some(border) = opts.border {
            if config.window().distance_to_boundary(x) < border {
                continue;
            }
        }
        used += 1;
        terms.evaluate(basis, taper, &index, x, Some(id));

        // weight w = psi * Psi and its gradient
        let w = match variant {
            Variant::ShiftInvariant => {
                grad_w.copy_from_slice(&terms.grad_psi);
                terms.psi
            }
            Variant::Grid { cell_side } => {
                let psi_cell = cell_taper(x, &origin, cell_side, &mut grad_taper);
                for k in 0..d {
                    grad_w[k] = psi_cell * terms.grad_psi[k] + terms.psi * grad_taper[k];
                }
                psi_cell * terms.psi
            }
        };

        match opts.formula {
            Formula::Simplified => {
                for i in 0..p {
                    let gi = terms.grad_row(i);
                    for j in 0..p {
                        let gj = terms.grad_row(j);
                        a[i * p + j] = w * gi.iter().zip(gj).map(|(u, v)| u * v).sum::<f64>();
                    }
                    b[i] = w * terms.laplacian[i] + grad_w.iter().zip(gi).map(|(u, v)| u * v).sum::<f64>();
                }
            }
            Formula::Raw => {
                let div_w: f64 = grad_w.iter().sum();
                for i in 0..p {
                    for j in 0..p {
                        a[i * p + j] = w * terms.div[i] * terms.div[j];
                    }
                    b[i] = w * terms.div_div[i] + div_w * terms.div[i];
                }
            }
        }
        sink(id, x, &a, &b);
    }
    Ok(used)
}

pub(crate) fn check_grid(config: &Configuration, cell_side: f64) -> Result<()> {
    if !(cell_side > 0.0) || !cell_side.is_finite() {
        return Err(Error::IndivisibleWindow { side: cell_side, extent: f64::NAN });
    }
    for k in 0..config.dim() {
        let extent = config.window().extent(k);
        let ratio = extent / cell_side;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::IndivisibleWindow { side: cell_side, extent });
        }
    }
    Ok(())
}

fn build(config: &Configuration, basis: &PotentialBasis, taper: &Taper, variant: Variant, opts: &SystemOptions) -> Result<EmpiricalSystem> {
    let p = basis.len();
    let mut a = vec![0.0; p * p];
    let mut b = vec![0.0; p];
    let used = for_each_contribution(config, basis, taper, variant, opts, |_, _, da, db| {
        for (acc, v) in a.iter_mut().zip(da) {
            *acc += v;
        }
        for (acc, v) in b.iter_mut().zip(db) {
            *acc += v;
        }
    })?;
    Ok(EmpiricalSystem {
        p,
        a,
        b,
        points_used: used,
        total_points: config.len(),
        volume: config.window().volume(),
        variant,
        formula: opts.formula,
        space: ParameterSpace::for_basis(basis),
    })
}

/// Empirical system for the shift-invariant estimator. Every quantity at a data point `x`
/// is evaluated against `omega \ x`.
pub fn shift_invariant_system(
    config: &Configuration,
    basis: &PotentialBasis,
    taper: &Taper,
    opts: &SystemOptions,
) -> Result<EmpiricalSystem> {
    build(config, basis, taper, Variant::ShiftInvariant, opts)
}

/// Empirical system for the grid estimator; the window sides must be multiples of `cell_side`.
pub fn grid_system(
    config: &Configuration,
    basis: &PotentialBasis,
    taper: &Taper,
    cell_side: f64,
    opts: &SystemOptions,
) -> Result<EmpiricalSystem> {
    build(config, basis, taper, Variant::Grid { cell_side }, opts)
}

pub fn build_system(
    config: &Configuration,
    basis: &PotentialBasis,
    taper: &Taper,
    variant: Variant,
    opts: &SystemOptions,
) -> Result<EmpiricalSystem> {
    build(config, basis, taper, variant, opts)
}
