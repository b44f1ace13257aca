use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GibbsModel, PotentialBasis, SigmaEpsilon, Taper};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    LennardJones,
    HardSphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Canonical(Vec<f64>),
    Physical { sigma: f64, epsilon: f64 },
}

/// On-disk model description.
///
/// ```json
/// {"basis": "lennard-jones", "theta": {"sigma": 0.1, "epsilon": 0.5}, "z": 100, "R0": 0.25}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub basis: BasisKind,
    pub theta: ThetaSpec,
    pub z: f64,
    #[serde(rename = "R0", default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
}

/// Lennard-Jones truncation radius in units of `sigma` when none is given.
pub const DEFAULT_RANGE_IN_SIGMA: f64 = 2.5;

impl ModelSpec {
    pub fn lennard_jones(sigma: f64, epsilon: f64, z: f64) -> Self {
        ModelSpec {
            basis: BasisKind::LennardJones,
            theta: ThetaSpec::Physical { sigma, epsilon },
            z,
            range: Some(DEFAULT_RANGE_IN_SIGMA * sigma),
            r0: None,
            r1: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn theta(&self) -> Vec<f64> {
        match &self.theta {
            ThetaSpec::Canonical(t) => t.clone(),
            ThetaSpec::Physical { sigma, epsilon } => SigmaEpsilon::new(*sigma, *epsilon).to_theta().to_vec(),
        }
    }

    /// `sigma` when the parameters are given physically or lie in the Lennard-Jones parameter space.
    pub fn sigma(&self) -> Option<f64> {
        match (&self.theta, self.basis) {
            (ThetaSpec::Physical { sigma, .. }, _) => Some(*sigma),
            (ThetaSpec::Canonical(t), BasisKind::LennardJones) => SigmaEpsilon::from_theta(t).ok().map(|p| p.sigma),
            _ => None,
        }
    }

    pub fn resolved_range(&self) -> Result<f64> {
        match (self.range, self.sigma()) {
            (Some(r), _) => Ok(r),
            (None, Some(s)) if self.basis == BasisKind::LennardJones => Ok(DEFAULT_RANGE_IN_SIGMA * s),
            _ => Err(Error::InvalidModel("R0 is required".into())),
        }
    }

    pub fn basis(&self) -> Result<PotentialBasis> {
        let range = self.resolved_range()?;
        Ok(match self.basis {
            BasisKind::LennardJones => PotentialBasis::lennard_jones(range),
            BasisKind::HardSphere => {
                let r0 = self.r0.ok_or_else(|| Error::InvalidModel("hard-sphere basis needs r0".into()))?;
                PotentialBasis::hard_sphere(r0, range)
            }
        })
    }

    pub fn model(&self) -> Result<GibbsModel> {
        GibbsModel::new(self.basis()?, self.theta(), self.z)
    }

    /// `Psi` weight paired with this basis.
    pub fn taper(&self) -> Result<Taper> {
        match self.basis {
            BasisKind::LennardJones => Ok(Taper::One),
            BasisKind::HardSphere => {
                let range = self.resolved_range()?;
                let r0 = self.r0.ok_or_else(|| Error::InvalidModel("hard-sphere basis needs r0".into()))?;
                let r1 = self.r1.unwrap_or(0.5 * (r0 + range));
                if !(r0 < r1 && r1 < range) {
                    return Err(Error::InvalidModel(format!("need r0 < r1 < R0, got {r0}, {r1}, {range}")));
                }
                Ok(Taper::HardCore { r0, r1 })
            }
        }
    }
}
