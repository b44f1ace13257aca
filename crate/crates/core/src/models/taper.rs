//! Nonnegative weights multiplying the test functions: the configuration weight `Psi`
//! (identically one, or the hard-core product of `chi` ramps) and the cell taper `psi`.

use serde::{Deserialize, Serialize};

use crate::geometry::CellIndex;

/// Configuration weight `Psi(x, omega)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Taper {
    One,
    /// Product over neighbors of `chi(|x-y|^2)`, a linear ramp from 0 at `r0^2` to 1 at `r1^2`.
    HardCore { r0: f64, r1: f64 },
}

impl Taper {
    /// Radius beyond which neighbors do not affect `Psi`.
    pub fn reach(&self) -> f64 {
        match *self {
            Taper::One => 0.0,
            Taper::HardCore { r1, .. } => r1,
        }
    }
}

/// `chi_{r0,r1}(s)` with the thresholds given as radii.
pub fn chi(s: f64, r0: f64, r1: f64) -> f64 {
    let (a, b) = (r0 * r0, r1 * r1);
    if s <= a {
        0.0
    } else if s >= b {
        1.0
    } else {
        (s - a) / (b - a)
    }
}

/// Accumulates `Psi` and its gradient over a stream of neighbors.
#[derive(Clone, Debug)]
pub(crate) struct PsiAccumulator {
    zero: bool,
    product: f64,
    /// `sum over active y of grad chi_y / chi_y`
    log_grad: Vec<f64>,
}

impl PsiAccumulator {
    pub(crate) fn new(dim: usize) -> Self {
        PsiAccumulator { zero: false, product: 1.0, log_grad: vec![0.0; dim] }
    }

    pub(crate) fn reset(&mut self) {
        self.zero = false;
        self.product = 1.0;
        self.log_grad.fill(0.0);
    }

    #[inline]
    pub(crate) fn push(&mut self, r0: f64, r1: f64, x: &[f64], y: &[f64], s: f64) {
        let (a, b) = (r0 * r0, r1 * r1);
        if s >= b || self.zero {
            return;
        }
        if s <= a {
            self.zero = true;
            return;
        }
        let c = (s - a) / (b - a);
        self.product *= c;
        let k = 2.0 / ((b - a) * c);
        for (g, (xk, yk)) in self.log_grad.iter_mut().zip(x.iter().zip(y)) {
            *g += k * (xk - yk);
        }
    }

    /// `(Psi, grad Psi)`; the gradient is zero almost everywhere on the zero set.
    pub(crate) fn finish(&self, grad: &mut [f64]) -> f64 {
        if self.zero {
            grad.fill(0.0);
            return 0.0;
        }
        for (g, l) in grad.iter_mut().zip(&self.log_grad) {
            *g = self.product * l;
        }
        self.product
    }
}

/// `Psi(x, omega \ skip)` and `div Psi` for the hard-core weight.
pub fn psi_hardcore(x: &[f64], index: &CellIndex, skip: Option<usize>, r0: f64, r1: f64) -> (f64, f64) {
    let mut acc = PsiAccumulator::new(x.len());
    index.for_each_neighbor(x, r1, skip, |j, s| acc.push(r0, r1, x, index.point(j), s));
    let mut grad = vec![0.0; x.len()];
    let psi = acc.finish(&mut grad);
    (psi, grad.iter().sum())
}

/// Gradient of the hard-core `Psi` at `x`.
pub fn grad_psi_hardcore(x: &[f64], index: &CellIndex, skip: Option<usize>, r0: f64, r1: f64) -> Vec<f64> {
    let mut acc = PsiAccumulator::new(x.len());
    index.for_each_neighbor(x, r1, skip, |j, s| acc.push(r0, r1, x, index.point(j), s));
    let mut grad = vec![0.0; x.len()];
    acc.finish(&mut grad);
    grad
}

/// Cell taper `psi(u) = prod_k u_k (1 - u_k)` at the local coordinate
/// `u = ((x - origin) mod a) / a`, with its gradient in `x`.
pub fn cell_taper(x: &[f64], origin: &[f64], side: f64, grad: &mut [f64]) -> f64 {
    let d = x.len();
    let mut factors = [0.0f64; 8];
    let mut slopes = [0.0f64; 8];
    assert!(d <= 8, "cell taper supports at most 8 dimensions");
    for k in 0..d {
        let u = ((x[k] - origin[k]) / side).rem_euclid(1.0);
        factors[k] = u * (1.0 - u);
        slopes[k] = (1.0 - 2.0 * u) / side;
    }
    for k in 0..d {
        grad[k] = slopes[k] * (0..d).filter(|&l| l != k).map(|l| factors[l]).product::<f64>();
    }
    factors[..d].iter().product()
}
