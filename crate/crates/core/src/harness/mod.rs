//! Experiment plumbing: config loading, single runs, Monte-Carlo studies,
//! the two-solver figure and on-disk outputs.

mod config;
mod fig1;
mod montecarlo;
mod output;
mod run;

use thiserror::Error;

pub use config::{
    load_config, parse_config, AlphaMode, AnalysisSpec, ConfigError, ExperimentConfig, Fig1Spec, InitDistribution,
    InitSpec, MetricsSpec, MonteCarloSpec, OutputSpec, SolverSpec, THEORETICAL_SAFETY,
};
pub use fig1::{reproduce_fig1, Fig1Result};
pub use montecarlo::{run_monte_carlo, MonteCarloSummary, TrialOutcome};
pub use output::{
    emit_fig1, emit_monte_carlo, emit_outputs, export_dataset_csv, export_matrix_csv, metrics_csv, svg_line_chart,
    ChartSeries, METRICS_HEADER,
};
pub use run::{build_instance, run_single, Bounds, Instance, RunMeta, RunRecord};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run failed: {message}")]
    Runtime { message: String, record: Option<Box<RunRecord>> },
    #[error("{path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("refusing to overwrite existing {0} (pass the overwrite flag)")]
    Exists(std::path::PathBuf),
}

impl HarnessError {
    /// `1` for configuration problems, `2` for everything that happens after.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}
