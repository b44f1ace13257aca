use serde::{Deserialize, Serialize};

/// Physical Lennard-Jones parameters: well depth `epsilon` and length scale `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaEpsilon {
    pub sigma: f64,
    pub epsilon: f64,
}

/// Canonical parameters outside `{theta_1 > 0, theta_2 < 0}`; carries the offending vector.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("canonical parameters {0:?} lie outside the Lennard-Jones parameter space")]
pub struct InvalidTheta(pub Vec<f64>);

impl SigmaEpsilon {
    pub fn new(sigma: f64, epsilon: f64) -> Self {
        SigmaEpsilon { sigma, epsilon }
    }

    /// `(4 eps sigma^12, -4 eps sigma^6)`.
    pub fn to_theta(self) -> [f64; 2] {
        let s6 = self.sigma.powi(6);
        [4.0 * self.epsilon * s6 * s6, -4.0 * self.epsilon * s6]
    }

    pub fn from_theta(theta: &[f64]) -> Result<Self, InvalidTheta> {
        if !theta_is_valid(theta) {
            return Err(InvalidTheta(theta.to_vec()));
        }
        let (t1, t2) = (theta[0], theta[1]);
        Ok(SigmaEpsilon { sigma: (-t1 / t2).powf(1.0 / 6.0), epsilon: t2 * t2 / (4.0 * t1) })
    }
}

pub fn theta_is_valid(theta: &[f64]) -> bool {
    theta.len() == 2 && theta[0] > 0.0 && theta[1] < 0.0 && theta.iter().all(|t| t.is_finite())
}

/// Gradient of `(sigma, epsilon)` with respect to `theta`, rows `sigma` then `epsilon`.
pub fn sigma_epsilon_jacobian(theta: &[f64]) -> [[f64; 2]; 2] {
    let (t1, t2) = (theta[0], theta[1]);
    let sigma = (-t1 / t2).powf(1.0 / 6.0);
    let eps = t2 * t2 / (4.0 * t1);
    [[sigma / (6.0 * t1), -sigma / (6.0 * t2)], [-eps / t1, 2.0 * eps / t2]]
}
