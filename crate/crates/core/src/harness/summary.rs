use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fit::status_of;
use super::runner::{Row, SystemRecord, SCATTER_FILE, SUMMARY_FILE};
use crate::error::Result;
use crate::estimators::{pooled_estimate, EmpiricalSystem};
use crate::geometry::io::format_coord;

/// Scale factors applied to `(theta1, theta2)` in the scatter file.
pub const SCATTER_SCALE: [f64; 2] = [1e12, 1e6];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Sample standard deviation (`n - 1` denominator); zero for a single value.
    pub sd: Option<f64>,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        let n = values.len();
        if n == 0 {
            return Stats::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        let sd = if n == 1 { 0.0 } else { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() };
        Stats { n, mean: Some(mean), median: Some(median), sd: Some(sd) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThetaStats {
    pub theta1: Stats,
    pub theta2: Stats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SigmaEpsilonStats {
    pub sigma: Stats,
    pub epsilon: Stats,
}

/// Estimate from systems averaged over replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledRow {
    pub replicates: usize,
    pub theta: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub valid: bool,
    pub condition: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub rows: usize,
    /// Rows whose fit failed outright (singular system, divergence, ...).
    pub failed: usize,
    /// Rows that are failed or fall outside the parameter space, over all rows.
    pub invalid_proportion: f64,
    /// Convention "exclude": sigma and epsilon over valid rows only.
    pub sigma_epsilon_valid: SigmaEpsilonStats,
    /// Convention "include-as-theta": canonical parameters over every fitted row.
    pub theta_all: ThetaStats,
    /// Canonical parameters over valid rows.
    pub theta_valid: ThetaStats,
    pub pooled: Option<PooledRow>,
    pub seconds: Stats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replicates: usize,
    pub estimators: Vec<EstimatorSummary>,
}

impl Summary {
    pub fn estimator(&self, label: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == label)
    }

    /// Writes `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

fn theta_stats<'a>(rows: impl Iterator<Item = &'a Row> + Clone) -> ThetaStats {
    let t: Vec<[f64; 2]> = rows.filter_map(|r| r.theta).collect();
    ThetaStats {
        theta1: Stats::of(&t.iter().map(|v| v[0]).collect::<Vec<_>>()),
        theta2: Stats::of(&t.iter().map(|v| v[1]).collect::<Vec<_>>()),
    }
}

fn pooled_row(systems: &[EmpiricalSystem]) -> PooledRow {
    match pooled_estimate(systems) {
        Ok(est) => PooledRow {
            replicates: systems.len(),
            sigma: est.sigma_epsilon.map(|s| s.sigma),
            epsilon: est.sigma_epsilon.map(|s| s.epsilon),
            theta: Some(est.theta),
            valid: est.valid,
            condition: Some(est.condition),
            status: "ok".into(),
        },
        Err(e) => PooledRow {
            replicates: systems.len(),
            theta: None,
            sigma: None,
            epsilon: None,
            valid: false,
            condition: None,
            status: status_of(&e),
        },
    }
}

/// Summary statistics per estimator, in order of first appearance in `rows`.
pub fn summarize(rows: &[Row], systems: &[SystemRecord]) -> Summary {
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.estimator.as_str()) {
            labels.push(&r.estimator);
        }
    }
    let mut by_label: BTreeMap<&str, Vec<EmpiricalSystem>> = BTreeMap::new();
    for s in systems {
        by_label.entry(s.estimator.as_str()).or_default().push(s.system.clone());
    }
    let estimators = labels
        .iter()
        .map(|label| {
            let mine = rows.iter().filter(|r| r.estimator == *label);
            let n = mine.clone().count();
            let valid = mine.clone().filter(|r| r.is_ok() && r.valid);
            let se: Vec<(f64, f64)> = valid.clone().filter_map(|r| r.sigma_epsilon).collect();
            let invalid = n - valid.clone().count();
            EstimatorSummary {
                estimator: label.to_string(),
                rows: n,
                failed: mine.clone().filter(|r| !r.is_ok()).count(),
                invalid_proportion: if n == 0 { 0.0 } else { invalid as f64 / n as f64 },
                sigma_epsilon_valid: SigmaEpsilonStats {
                    sigma: Stats::of(&se.iter().map(|v| v.0).collect::<Vec<_>>()),
                    epsilon: Stats::of(&se.iter().map(|v| v.1).collect::<Vec<_>>()),
                },
                theta_all: theta_stats(mine.clone()),
                theta_valid: theta_stats(valid),
                pooled: by_label.get(label).map(|s| pooled_row(s)),
                seconds: Stats::of(&mine.filter_map(|r| r.seconds).collect::<Vec<_>>()),
            }
        })
        .collect();
    let replicates = rows.iter().map(|r| r.rep + 1).max().unwrap_or(0);
    Summary { replicates, estimators }
}

/// Writes `(theta1 * 1e12, theta2 * 1e6)` for every fitted row.
pub fn write_scatter(dir: &Path, rows: &[Row]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(dir.join(SCATTER_FILE))?;
    wtr.write_record(["rep", "estimator", "theta1_e12", "theta2_e6", "valid"])?;
    for r in rows {
        if let Some(t) = r.theta {
            wtr.write_record([
                r.rep.to_string(),
                r.estimator.clone(),
                format_coord(t[0] * SCATTER_SCALE[0]),
                format_coord(t[1] * SCATTER_SCALE[1]),
                r.valid.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
