//! Replicated simulation studies: plans, per-replicate rows and summaries.

mod fit;
mod plan;
mod runner;
mod summary;

pub use fit::{fit_pattern, status_of};
pub use plan::{EstimatorSpec, ExperimentPlan, WindowSpec};
pub use runner::{
    read_rows, read_systems, run_experiment, summarize_dir, ExperimentReport, Row, SystemRecord, ROWS_FILE, ROWS_HEADER,
    SCATTER_FILE, SUMMARY_FILE, SYSTEMS_FILE,
};
pub use summary::{summarize, write_scatter, EstimatorSummary, PooledRow, SigmaEpsilonStats, Stats, Summary, ThetaStats, SCATTER_SCALE};
