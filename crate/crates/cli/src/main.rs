use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use vargibbs::estimators::Formula;
use vargibbs::geometry::io::{read_pattern, write_pattern};
use vargibbs::harness::{fit_pattern, run_experiment, summarize_dir, EstimatorSpec, ExperimentPlan};
use vargibbs::models::{ModelSpec, ThetaSpec};
use vargibbs::mple::DEFAULT_GRID_RES;
use vargibbs::sampler::{simulate, simulate_with_trace, SamplerConfig};
use vargibbs::Window;

/// Environment variable capping the number of replicates run at once.
const WORKERS_ENV: &str = "VARGIBBS_WORKERS";

#[derive(Parser)]
#[command(name = "vargibbs", version, about = "Simulate and fit pairwise-interaction Gibbs point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one pattern with the birth-death-move sampler.
    Simulate(SimulateArgs),
    /// Estimate the canonical parameters of a pattern.
    Fit(FitArgs),
    /// Run a replicated study described by a plan file.
    Experiment(ExperimentArgs),
    /// Rebuild summary.json and scatter.csv from an experiment directory.
    Summarize {
        dir: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Model JSON file; overrides the Lennard-Jones flags below.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Activity.
    #[arg(long, default_value_t = 100.0)]
    z: f64,
    /// Truncation radius; defaults to 2.5 sigma.
    #[arg(long)]
    range: Option<f64>,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        let spec = match &self.model {
            Some(path) => ModelSpec::load(path).with_context(|| format!("reading model {}", path.display()))?,
            None => {
                let mut spec = ModelSpec::lennard_jones(self.sigma, self.epsilon, self.z);
                if self.range.is_some() {
                    spec.range = self.range;
                }
                spec
            }
        };
        spec.model()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Upper window corner, comma separated; the window starts at the origin unless --lower is given.
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    upper: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    lower: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500_000)]
    steps: u64,
    /// Move-only chain with this many points.
    #[arg(long)]
    fixed_n: Option<usize>,
    /// Half-width of move proposals; defaults to sigma / 2.
    #[arg(long)]
    move_scale: Option<f64>,
    /// Write (step, energy, count) every this many steps to <out>.trace.csv.
    #[arg(long)]
    trace: Option<u64>,
    /// Pattern CSV; the window sidecar goes next to it.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    Invariant,
    Grid,
    Mple,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    Simplified,
    Raw,
}

#[derive(Args)]
struct FitArgs {
    /// Pattern CSV with its JSON sidecar.
    pattern: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "grid")]
    estimator: EstimatorKind,
    #[arg(long, value_enum, default_value = "simplified")]
    formula: FormulaArg,
    #[arg(long, default_value_t = 0.2)]
    cell_side: f64,
    /// Only points at least this far from the boundary enter the outer sums.
    #[arg(long)]
    border: Option<f64>,
    /// Attach the sandwich covariance (grid estimator only).
    #[arg(long)]
    covariance: bool,
    #[arg(long, default_value_t = DEFAULT_GRID_RES)]
    grid_res: usize,
    /// Distance unit for the pseudolikelihood statistics.
    #[arg(long)]
    rescale: Option<f64>,
    /// Result JSON; printed to stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Master seed; overrides the plan.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the plan.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of replicates; overrides the plan.
    #[arg(long)]
    replicates: Option<usize>,
    /// Leave the seconds column empty so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Simulate(args) => simulate_cmd(&args),
        Command::Fit(args) => fit_cmd(&args),
        Command::Experiment(args) => experiment_cmd(&args),
        Command::Summarize { dir } => {
            let summary = summarize_dir(&dir).with_context(|| format!("summarizing {}", dir.display()))?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
    }
}

fn trace_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.trace.csv"))
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let spec = args.model.spec()?;
    let model = spec.model()?;
    let lower = args.lower.clone().unwrap_or_else(|| vec![0.0; args.upper.len()]);
    let window = Window::new(lower, args.upper.clone())?;
    let cfg = SamplerConfig {
        steps: args.steps,
        seed: args.seed,
        fixed_n: args.fixed_n,
        move_scale: args.move_scale.or(spec.sigma().map(|s| s / 2.0)).unwrap_or(SamplerConfig::default().move_scale),
        ..SamplerConfig::default()
    };
    let config = match args.trace {
        Some(every) => {
            let (config, trace) = simulate_with_trace(&model, &window, &cfg, every)?;
            let path = trace_path(&args.out);
            let mut wtr = csv::Writer::from_path(&path)?;
            wtr.write_record(["step", "energy", "count"])?;
            for p in &trace.points {
                wtr.write_record([p.step.to_string(), format!("{:.16e}", p.energy), p.count.to_string()])?;
            }
            wtr.flush()?;
            config
        }
        None => simulate(&model, &window, &cfg)?,
    };
    write_pattern(&config, &args.out)?;
    info!("wrote {} points to {}", config.len(), args.out.display());
    Ok(())
}

fn fit_cmd(args: &FitArgs) -> Result<()> {
    let config = read_pattern(&args.pattern).with_context(|| format!("reading pattern {}", args.pattern.display()))?;
    let model = args.model.spec()?;
    let formula = match args.formula {
        FormulaArg::Simplified => Formula::Simplified,
        FormulaArg::Raw => Formula::Raw,
    };
    let spec = match args.estimator {
        EstimatorKind::Invariant => EstimatorSpec::Invariant { formula, border: args.border },
        EstimatorKind::Grid => {
            EstimatorSpec::Grid { cell_side: args.cell_side, formula, border: args.border, covariance: args.covariance }
        }
        EstimatorKind::Mple => EstimatorSpec::Mple { grid_res: args.grid_res, rescale: args.rescale },
    };
    if args.covariance && !matches!(spec, EstimatorSpec::Grid { .. }) {
        bail!("--covariance needs --estimator grid");
    }
    let (result, _) = fit_pattern(&config, &model, &spec)?;
    let text = serde_json::to_string_pretty(&result)?;
    match &args.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn experiment_cmd(args: &ExperimentArgs) -> Result<()> {
    let mut plan = ExperimentPlan::load(&args.plan).with_context(|| format!("reading plan {}", args.plan.display()))?;
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    if let Some(out) = &args.out {
        plan.output_dir = out.clone();
    }
    if let Some(n) = args.replicates {
        plan.replicates = n;
    }
    if args.no_timings {
        plan.record_timings = false;
    }
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let n: usize = value.parse().with_context(|| format!("{WORKERS_ENV}={value}"))?;
        plan.workers = Some(n.max(1));
    }
    if let ThetaSpec::Physical { sigma, epsilon } = plan.model.theta {
        info!("sigma {sigma}, epsilon {epsilon}, {} replicates", plan.replicates);
    }
    let report = run_experiment(&plan)?;
    for est in &report.summary.estimators {
        info!("{}: {} rows, invalid proportion {:.3}", est.estimator, est.rows, est.invalid_proportion);
    }
    println!("{}", report.output_dir.display());
    Ok(())
}
