/// Value and first two derivatives of one pair potential, as functions of squared distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTerms {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl PairTerms {
    pub const ZERO: PairTerms = PairTerms { value: 0.0, d1: 0.0, d2: 0.0 };
    /// Inside a hard core: infinite energy, derivatives taken as zero.
    pub const HARD: PairTerms = PairTerms { value: f64::INFINITY, d1: 0.0, d2: 0.0 };
}

/// The `p` component pair potentials `phi_i(s)`, `s = |x - y|^2`, with a common finite range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialBasis {
    /// `phi_1(s) = s^-6`, `phi_2(s) = s^-3`, truncated to zero for `s >= range^2`.
    LennardJones { range: f64 },
    /// Hard core of radius `hard_core` plus the bounded polynomial pair
    /// `phi_1 = (1 - s/R^2)^2`, `phi_2 = (1 - s/R^2)^3` on `[hard_core^2, R^2)`.
    HardSphere { hard_core: f64, range: f64 },
}

impl PotentialBasis {
    pub fn lennard_jones(range: f64) -> Self {
        PotentialBasis::LennardJones { range }
    }

    pub fn hard_sphere(hard_core: f64, range: f64) -> Self {
        PotentialBasis::HardSphere { hard_core, range }
    }

    /// Number of components `p`.
    pub fn len(&self) -> usize {
        2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn range(&self) -> f64 {
        match *self {
            PotentialBasis::LennardJones { range } | PotentialBasis::HardSphere { range, .. } => range,
        }
    }

    pub fn hard_core(&self) -> Option<f64> {
        match *self {
            PotentialBasis::LennardJones { .. } => None,
            PotentialBasis::HardSphere { hard_core, .. } => Some(hard_core),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PotentialBasis::LennardJones { .. } => "lennard-jones",
            PotentialBasis::HardSphere { .. } => "hard-sphere",
        }
    }

    /// Evaluates all components at squared distance `s > 0`.
    #[inline]
    pub fn eval(&self, s: f64, out: &mut [PairTerms]) {
        debug_assert_eq!(out.len(), self.len());
        match *self {
            PotentialBasis::LennardJones { range } => {
                if s >= range * range {
                    out.fill(PairTerms::ZERO);
                    return;
                }
                let inv = 1.0 / s;
                let inv3 = inv * inv * inv;
                let inv6 = inv3 * inv3;
                out[0] = PairTerms { value: inv6, d1: -6.0 * inv6 * inv, d2: 42.0 * inv6 * inv * inv };
                out[1] = PairTerms { value: inv3, d1: -3.0 * inv3 * inv, d2: 12.0 * inv3 * inv * inv };
            }
            PotentialBasis::HardSphere { hard_core, range } => {
                let r2 = range * range;
                if s >= r2 {
                    out.fill(PairTerms::ZERO);
                    return;
                }
                if s < hard_core * hard_core {
                    out.fill(PairTerms::HARD);
                    return;
                }
                let t = 1.0 - s / r2;
                out[0] = PairTerms { value: t * t, d1: -2.0 * t / r2, d2: 2.0 / (r2 * r2) };
                out[1] = PairTerms { value: t * t * t, d1: -3.0 * t * t / r2, d2: 6.0 * t / (r2 * r2) };
            }
        }
    }

    /// `sum_i theta_i phi_i(s)`; `+inf` inside a hard core regardless of `theta`.
    #[inline]
    pub fn combined(&self, theta: &[f64], s: f64) -> f64 {
        match *self {
            PotentialBasis::LennardJones { range } => {
                if s >= range * range {
                    return 0.0;
                }
                let inv3 = 1.0 / (s * s * s);
                theta[0] * inv3 * inv3 + theta[1] * inv3
            }
            PotentialBasis::HardSphere { hard_core, range } => {
                let r2 = range * range;
                if s >= r2 {
                    0.0
                } else if s < hard_core * hard_core {
                    f64::INFINITY
                } else {
                    let t = 1.0 - s / r2;
                    theta[0] * t * t + theta[1] * t * t * t
                }
            }
        }
    }

    /// Per-component factors `c_i` such that `phi_i(s) / c_i` is the same component
    /// expressed with distances measured in units of `unit`.
    pub fn unit_scale(&self, unit: f64) -> Vec<f64> {
        match self {
            PotentialBasis::LennardJones { .. } => vec![unit.powi(-12), unit.powi(-6)],
            PotentialBasis::HardSphere { .. } => vec![1.0, 1.0],
        }
    }
}
