use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::{Formula, SystemOptions, Variant};
use crate::geometry::Window;
use crate::models::ModelSpec;
use crate::sampler::SamplerConfig;

fn default_grid_res() -> usize {
    crate::mple::DEFAULT_GRID_RES
}

fn yes() -> bool {
    true
}

/// One estimator to run on every replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "kebab-case")]
pub enum EstimatorSpec {
    Invariant {
        #[serde(default)]
        formula: Formula,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        border: Option<f64>,
    },
    Grid {
        cell_side: f64,
        #[serde(default)]
        formula: Formula,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        border: Option<f64>,
        #[serde(default)]
        covariance: bool,
    },
    Mple {
        #[serde(default = "default_grid_res")]
        grid_res: usize,
        /// Distance unit for the statistics; defaults to the model's `sigma`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rescale: Option<f64>,
    },
}

impl EstimatorSpec {
    /// Label used in the `estimator` column of the rows file.
    pub fn label(&self) -> String {
        let (base, formula, border) = match self {
            EstimatorSpec::Invariant { formula, border } => ("invariant", *formula, *border),
            EstimatorSpec::Grid { formula, border, .. } => ("grid", *formula, *border),
            EstimatorSpec::Mple { .. } => return "mple".to_string(),
        };
        let mut label = base.to_string();
        if formula == Formula::Raw {
            label.push_str("-raw");
        }
        if border.is_some() {
            label.push_str("-border");
        }
        label
    }

    /// Variant and options for the variational estimators.
    pub fn variational(&self) -> Option<(Variant, SystemOptions)> {
        match *self {
            EstimatorSpec::Invariant { formula, border } => Some((Variant::ShiftInvariant, SystemOptions { formula, border })),
            EstimatorSpec::Grid { cell_side, formula, border, .. } => {
                Some((Variant::Grid { cell_side }, SystemOptions { formula, border }))
            }
            EstimatorSpec::Mple { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl WindowSpec {
    pub fn window(&self) -> Result<Window> {
        Window::new(self.lower.clone(), self.upper.clone())
    }
}

/// Full description of a simulation study; replicate `r` is simulated with
/// `derive_seed(seed, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    pub window: WindowSpec,
    pub replicates: usize,
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub estimators: Vec<EstimatorSpec>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Write per-fit wall-clock seconds into the rows file; disable for byte-reproducible output.
    #[serde(default = "yes")]
    pub record_timings: bool,
    /// Replicates run concurrently; defaults to the rayon pool size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentPlan {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Lennard-Jones study on `[0, side]^2` with the three estimators of the reference study.
    pub fn lennard_jones_study(epsilon: f64, side: f64, replicates: usize, seed: u64, output_dir: PathBuf) -> Self {
        let sigma = 0.1;
        ExperimentPlan {
            model: ModelSpec::lennard_jones(sigma, epsilon, 100.0),
            window: WindowSpec { lower: vec![0.0, 0.0], upper: vec![side, side] },
            replicates,
            sampler: SamplerConfig { move_scale: sigma / 2.0, ..SamplerConfig::default() },
            estimators: vec![
                EstimatorSpec::Invariant { formula: Formula::Simplified, border: None },
                EstimatorSpec::Grid { cell_side: 0.2, formula: Formula::Simplified, border: None, covariance: false },
                EstimatorSpec::Mple { grid_res: default_grid_res(), rescale: None },
            ],
            output_dir,
            seed,
            record_timings: true,
            workers: None,
        }
    }
}
