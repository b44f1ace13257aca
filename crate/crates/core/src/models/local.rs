//! Local energies `h^i(x, omega)` and their spatial derivatives, accumulated in one neighbor pass.

use super::basis::{PairTerms, PotentialBasis};
use super::taper::{PsiAccumulator, Taper};
use crate::geometry::CellIndex;

/// Every per-point quantity the estimators consume, for one location `x`.
///
/// `grad` is row-major `p x d`: entry `(i, k)` is `d h^i / d x_k`.
#[derive(Clone, Debug)]
pub struct LocalTerms {
    p: usize,
    dim: usize,
    pub energy: Vec<f64>,
    pub grad: Vec<f64>,
    pub div: Vec<f64>,
    pub div_div: Vec<f64>,
    pub laplacian: Vec<f64>,
    pub psi: f64,
    pub grad_psi: Vec<f64>,
    pub neighbors: usize,
    pair: Vec<PairTerms>,
    psi_acc: PsiAccumulator,
}

impl LocalTerms {
    pub fn new(p: usize, dim: usize) -> Self {
        LocalTerms {
            p,
            dim,
            energy: vec![0.0; p],
            grad: vec![0.0; p * dim],
            div: vec![0.0; p],
            div_div: vec![0.0; p],
            laplacian: vec![0.0; p],
            psi: 1.0,
            grad_psi: vec![0.0; dim],
            neighbors: 0,
            pair: vec![PairTerms::ZERO; p],
            psi_acc: PsiAccumulator::new(dim),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grad_row(&self, i: usize) -> &[f64] {
        &self.grad[i * self.dim..(i + 1) * self.dim]
    }

    pub fn div_psi(&self) -> f64 {
        self.grad_psi.iter().sum()
    }

    /// Evaluates everything at `x` against the indexed points other than `skip`.
    pub fn evaluate(&mut self, basis: &PotentialBasis, taper: &Taper, index: &CellIndex, x: &[f64], skip: Option<usize>) {
        let d = self.dim;
        let df = d as f64;
        for v in [&mut self.energy, &mut self.grad, &mut self.div, &mut self.div_div, &mut self.laplacian] {
            v.fill(0.0);
        }
        self.psi_acc.reset();
        self.neighbors = 0;

        let range = basis.range();
        let radius = range.max(taper.reach());
        let (energy, grad, div, div_div, lap, pair, acc) = (
            &mut self.energy,
            &mut self.grad,
            &mut self.div,
            &mut self.div_div,
            &mut self.laplacian,
            &mut self.pair,
            &mut self.psi_acc,
        );
        let mut count = 0usize;
        index.for_each_neighbor(x, radius, skip, |j, s| {
            let y = index.point(j);
            if let Taper::HardCore { r0, r1 } = *taper {
                acc.push(r0, r1, x, y, s);
            }
            if s >= range * range {
                return;
            }
            count += 1;
            basis.eval(s, pair);
            let offset_sum: f64 = x.iter().zip(y).map(|(a, b)| a - b).sum();
            for (i, t) in pair.iter().enumerate() {
                energy[i] += t.value;
                if t.d1 == 0.0 && t.d2 == 0.0 {
                    continue;
                }
                let row = &mut grad[i * d..(i + 1) * d];
                for (g, (a, b)) in row.iter_mut().zip(x.iter().zip(y)) {
                    *g += 2.0 * (a - b) * t.d1;
                }
                div[i] += 2.0 * t.d1 * offset_sum;
                div_div[i] += 2.0 * (df * t.d1 + 2.0 * t.d2 * offset_sum * offset_sum);
                lap[i] += 2.0 * df * t.d1 + 4.0 * t.d2 * s;
            }
        });
        self.neighbors = count;
        self.psi = match taper {
            Taper::One => {
                self.grad_psi.fill(0.0);
                1.0
            }
            Taper::HardCore { .. } => self.psi_acc.finish(&mut self.grad_psi),
        };
    }
}

fn terms_at(basis: &PotentialBasis, index: &CellIndex, x: &[f64], skip: Option<usize>) -> LocalTerms {
    let mut t = LocalTerms::new(basis.len(), x.len());
    t.evaluate(basis, &Taper::One, index, x, skip);
    t
}

/// `h^i(x, omega)`; components may be `+inf` inside a hard core.
pub fn local_energy_basis(basis: &PotentialBasis, index: &CellIndex, x: &[f64], skip: Option<usize>) -> Vec<f64> {
    terms_at(basis, index, x, skip).energy
}

/// `div h^i = 2 sum_y phi_i'(s_y) sum_k (x_k - y_k)`.
pub fn div_h_basis(basis: &PotentialBasis, index: &CellIndex, x: &[f64], skip: Option<usize>) -> Vec<f64> {
    terms_at(basis, index, x, skip).div
}

/// Row-major `p x d` matrix of `d h^i / d x_k`.
pub fn grad_h_basis(basis: &PotentialBasis, index: &CellIndex, x: &[f64], skip: Option<usize>) -> Vec<f64> {
    terms_at(basis, index, x, skip).grad
}

/// `div div h^i = 2 sum_y [d phi_i' + 2 phi_i'' (sum_k (x_k - y_k))^2]`.
pub fn div_div_h_basis(basis: &PotentialBasis, index: &CellIndex, x: &[f64], skip: Option<usize>) -> Vec<f64> {
    terms_at(basis, index, x, skip).div_div
}

/// `Laplacian h^i = sum_y [2 d phi_i' + 4 phi_i'' s_y]`.
pub fn laplacian_h_basis(basis: &PotentialBasis, index: &CellIndex, x: &[f64], skip: Option<usize>) -> Vec<f64> {
    terms_at(basis, index, x, skip).laplacian
}

/// `theta . h(x, omega)` for one location, without the derivative bookkeeping.
#[inline]
pub fn local_energy(basis: &PotentialBasis, theta: &[f64], index: &CellIndex, x: &[f64], skip: Option<usize>) -> f64 {
    let mut e = 0.0;
    index.for_each_neighbor(x, basis.range(), skip, |_, s| e += basis.combined(theta, s));
    e
}
