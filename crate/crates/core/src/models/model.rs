use super::basis::PotentialBasis;
use crate::error::{Error, Result};
use crate::geometry::{CellIndex, Configuration};

/// Exponential-family Gibbs model: basis, canonical parameters and activity `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsModel {
    pub basis: PotentialBasis,
    pub theta: Vec<f64>,
    pub z: f64,
}

impl GibbsModel {
    pub fn new(basis: PotentialBasis, theta: Vec<f64>, z: f64) -> Result<Self> {
        if theta.len() != basis.len() {
            return Err(Error::InvalidModel(format!("theta has {} entries, basis has {}", theta.len(), basis.len())));
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::InvalidModel(format!("intensity must be positive, got {z}")));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidModel("theta must be finite".into()));
        }
        let range = basis.range();
        if !(range > 0.0) || !range.is_finite() {
            return Err(Error::InvalidModel(format!("range must be positive, got {range}")));
        }
        if let Some(r0) = basis.hard_core() {
            if !(r0 > 0.0 && r0 < range) {
                return Err(Error::InvalidModel(format!("hard core {r0} must lie in (0, {range})")));
            }
        }
        Ok(GibbsModel { basis, theta, z })
    }

    pub fn pair_energy(&self, s: f64) -> f64 {
        self.basis.combined(&self.theta, s)
    }
}

/// Per-component energies `H^i(omega) = sum over unordered pairs of phi_i(|x-y|^2)`,
/// free boundary. `index` must be built over `omega` with range at least the basis range.
pub fn total_energy_basis(config: &Configuration, basis: &PotentialBasis, index: &CellIndex) -> Vec<f64> {
    let mut out = vec![0.0; basis.len()];
    let mut terms = vec![super::PairTerms::ZERO; basis.len()];
    for (i, x) in config.points().enumerate() {
        index.for_each_neighbor(x, basis.range(), None, |j, s| {
            if j > i {
                basis.eval(s, &mut terms);
                for (o, t) in out.iter_mut().zip(&terms) {
                    *o += t.value;
                }
            }
        });
    }
    out
}

/// `H^theta(omega)`; `+inf` when a hard core is violated.
pub fn total_energy(config: &Configuration, model: &GibbsModel, index: &CellIndex) -> f64 {
    let mut e = 0.0;
    for (i, x) in config.points().enumerate() {
        index.for_each_neighbor(x, model.basis.range(), None, |j, s| {
            if j > i {
                e += model.pair_energy(s);
            }
        });
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Window};

    #[test]
    fn trivial_configurations() {
        let m = GibbsModel::new(PotentialBasis::lennard_jones(0.25), vec![2e-12, -2e-6], 100.0).unwrap();
        let w = Window::cube(2, 2.0).unwrap();
        for pts in [vec![], vec![Point::new([1.0, 1.0])]] {
            let c = Configuration::new(w.clone(), &pts).unwrap();
            let idx = CellIndex::build(&c, 0.25).unwrap();
            assert_eq!(total_energy(&c, &m, &idx), 0.0);
        }
        let c = Configuration::new(w, &[Point::new([1.0, 1.0]), Point::new([1.1, 1.05])]).unwrap();
        let idx = CellIndex::build(&c, 0.25).unwrap();
        let s: f64 = 0.0125;
        let want = 2e-12 * s.powi(-6) - 2e-6 * s.powi(-3);
        assert!((total_energy(&c, &m, &idx) - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn rejects_bad_models() {
        let b = PotentialBasis::lennard_jones(0.25);
        assert!(GibbsModel::new(b.clone(), vec![1.0], 1.0).is_err());
        assert!(GibbsModel::new(b.clone(), vec![1.0, 1.0], 0.0).is_err());
        assert!(GibbsModel::new(PotentialBasis::hard_sphere(0.3, 0.25), vec![1.0, 1.0], 1.0).is_err());
        assert!(GibbsModel::new(b, vec![f64::NAN, 1.0], 1.0).is_err());
    }
}
