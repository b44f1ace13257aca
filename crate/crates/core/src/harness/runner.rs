use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_keeping_system, status_of};
use super::plan::ExperimentPlan;
use super::summary::{summarize, write_scatter, Summary};
use crate::error::{Error, Result};
use crate::estimators::EmpiricalSystem;
use crate::geometry::io::format_coord;
use crate::sampler::{derive_seed, simulate, SamplerConfig};

pub const ROWS_FILE: &str = "rows.csv";
pub const SYSTEMS_FILE: &str = "systems.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const ROWS_HEADER: [&str; 10] = ["rep", "estimator", "theta1", "theta2", "sigma", "eps", "valid", "cond", "seconds", "status"];

/// One fitted estimator on one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub rep: usize,
    pub estimator: String,
    pub theta: Option<[f64; 2]>,
    pub sigma_epsilon: Option<(f64, f64)>,
    pub valid: bool,
    pub cond: Option<f64>,
    pub seconds: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn record(&self) -> Vec<String> {
        let num = |v: Option<f64>| v.map(format_coord).unwrap_or_default();
        vec![
            self.rep.to_string(),
            self.estimator.clone(),
            num(self.theta.map(|t| t[0])),
            num(self.theta.map(|t| t[1])),
            num(self.sigma_epsilon.map(|s| s.0)),
            num(self.sigma_epsilon.map(|s| s.1)),
            self.valid.to_string(),
            num(self.cond),
            self.seconds.map(|s| format!("{s:.6}")).unwrap_or_default(),
            self.status.clone(),
        ]
    }

    fn parse(rec: &csv::StringRecord, path: &Path) -> Result<Row> {
        let bad = |what: &str| Error::Format { path: path.to_path_buf(), reason: format!("bad {what} in {rec:?}") };
        let opt = |i: usize, what: &str| -> Result<Option<f64>> {
            let f = rec.get(i).ok_or_else(|| bad(what))?;
            if f.is_empty() {
                Ok(None)
            } else {
                f.parse().map(Some).map_err(|_| bad(what))
            }
        };
        let theta = match (opt(2, "theta1")?, opt(3, "theta2")?) {
            (Some(a), Some(b)) => Some([a, b]),
            _ => None,
        };
        let sigma_epsilon = match (opt(4, "sigma")?, opt(5, "eps")?) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        Ok(Row {
            rep: rec.get(0).and_then(|v| v.parse().ok()).ok_or_else(|| bad("rep"))?,
            estimator: rec.get(1).ok_or_else(|| bad("estimator"))?.to_string(),
            theta,
            sigma_epsilon,
            valid: rec.get(6).and_then(|v| v.parse().ok()).ok_or_else(|| bad("valid"))?,
            cond: opt(7, "cond")?,
            seconds: opt(8, "seconds")?,
            status: rec.get(9).ok_or_else(|| bad("status"))?.to_string(),
        })
    }
}

/// Empirical system persisted for pooling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub rep: usize,
    pub estimator: String,
    pub system: EmpiricalSystem,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    pub systems: Vec<SystemRecord>,
    pub summary: Summary,
    pub output_dir: PathBuf,
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(ROWS_HEADER.iter().copied()) {
        return Err(Error::Format { path: path.to_path_buf(), reason: format!("unexpected header {header:?}") });
    }
    rdr.records().map(|r| Row::parse(&r?, path)).collect()
}

pub fn read_systems(path: &Path) -> Result<Vec<SystemRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

fn write_rows(path: &Path, rows: &[Row], append: bool) -> Result<()> {
    let file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if !append {
        wtr.write_record(ROWS_HEADER)?;
    }
    for r in rows {
        wtr.write_record(r.record())?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_systems(path: &Path, systems: &[SystemRecord], append: bool) -> Result<()> {
    let mut file = OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
    for s in systems {
        writeln!(file, "{}", serde_json::to_string(s)?)?;
    }
    Ok(())
}

struct ReplicateOutput {
    rows: Vec<Row>,
    systems: Vec<SystemRecord>,
}

fn run_replicate(plan: &ExperimentPlan, rep: usize) -> Result<ReplicateOutput> {
    let model = plan.model.model()?;
    let window = plan.window.window()?;
    let cfg = SamplerConfig { seed: derive_seed(plan.seed, rep as u64), ..plan.sampler.clone() };
    let config = simulate(&model, &window, &cfg)?;
    let mut rows = Vec::with_capacity(plan.estimators.len());
    let mut systems = Vec::new();
    for spec in &plan.estimators {
        let label = spec.label();
        let start = Instant::now();
        let (fitted, system) = match fit_keeping_system(&config, &plan.model, spec) {
            Ok(pair) => pair,
            Err(e) => (Err(e), None),
        };
        let seconds = plan.record_timings.then(|| start.elapsed().as_secs_f64());
        if let Some(system) = system {
            systems.push(SystemRecord { rep, estimator: label.clone(), system });
        }
        let row = match fitted {
            Ok(est) => Row {
                rep,
                estimator: label,
                theta: (est.theta.len() == 2).then(|| [est.theta[0], est.theta[1]]),
                sigma_epsilon: est.sigma_epsilon.map(|s| (s.sigma, s.epsilon)),
                valid: est.valid,
                cond: Some(est.condition),
                seconds,
                status: "ok".into(),
            },
            Err(e) => Row {
                rep,
                estimator: label,
                theta: None,
                sigma_epsilon: None,
                valid: false,
                cond: match e {
                    Error::SingularSystem { condition, .. } => Some(condition),
                    _ => None,
                },
                seconds,
                status: status_of(&e),
            },
        };
        rows.push(row);
    }
    Ok(ReplicateOutput { rows, systems })
}

/// Number of leading replicates fully present in `rows`.
fn completed_prefix(rows: &[Row], per_rep: usize) -> usize {
    let mut rep = 0;
    loop {
        let count = rows.iter().filter(|r| r.rep == rep).count();
        if count < per_rep {
            return rep;
        }
        rep += 1;
    }
}

/// Simulates every replicate, fits each estimator and writes rows, systems and the summary.
///
/// Rows are appended in replicate order as each batch finishes; rerunning on the same
/// output directory resumes after the last complete replicate.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.model.model()?;
    plan.window.window()?;
    plan.sampler.validate()?;
    if plan.estimators.is_empty() {
        return Err(Error::Empty("plan lists no estimators".into()));
    }
    let mut labels: Vec<String> = plan.estimators.iter().map(|e| e.label()).collect();
    labels.sort();
    if let Some(pair) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidPlan(format!("estimator label {} appears twice", pair[0])));
    }
    fs::create_dir_all(&plan.output_dir)?;
    let rows_path = plan.output_dir.join(ROWS_FILE);
    let systems_path = plan.output_dir.join(SYSTEMS_FILE);
    let per_rep = plan.estimators.len();

    let mut done = 0;
    if rows_path.exists() {
        let rows = read_rows(&rows_path)?;
        done = completed_prefix(&rows, per_rep).min(plan.replicates);
        let keep: Vec<Row> = rows.into_iter().filter(|r| r.rep < done).collect();
        let systems: Vec<SystemRecord> = read_systems(&systems_path)?.into_iter().filter(|s| s.rep < done).collect();
        write_rows(&rows_path, &keep, false)?;
        write_systems(&systems_path, &systems, false)?;
        if done > 0 {
            info!("resuming after {done} completed replicates");
        }
    } else {
        write_rows(&rows_path, &[], false)?;
        write_systems(&systems_path, &[], false)?;
    }

    let workers = plan.workers.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidPlan(format!("thread pool: {e}")))?;
    let mut next = done;
    while next < plan.replicates {
        let end = (next + workers).min(plan.replicates);
        let batch: Vec<Result<ReplicateOutput>> = pool.install(|| (next..end).into_par_iter().map(|rep| run_replicate(plan, rep)).collect());
        for out in batch {
            let out = out?;
            write_rows(&rows_path, &out.rows, true)?;
            write_systems(&systems_path, &out.systems, true)?;
        }
        info!("replicates {next}..{end} done");
        next = end;
    }

    let rows = read_rows(&rows_path)?;
    let systems = read_systems(&systems_path)?;
    let summary = summarize(&rows, &systems);
    summary.write(&plan.output_dir)?;
    write_scatter(&plan.output_dir, &rows)?;
    Ok(ExperimentReport { rows, systems, summary, output_dir: plan.output_dir.clone() })
}

/// Recomputes the summary files from persisted rows and systems.
pub fn summarize_dir(dir: &Path) -> Result<Summary> {
    let rows = read_rows(&dir.join(ROWS_FILE))?;
    let systems = read_systems(&dir.join(SYSTEMS_FILE))?;
    let summary = summarize(&rows, &systems);
    summary.write(dir)?;
    write_scatter(dir, &rows)?;
    Ok(summary)
}
