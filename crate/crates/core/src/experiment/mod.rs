//! Config-driven experiments that write CSV rows and SVG plots.

mod config;
mod plot;
mod rows;
mod run;

pub use config::{parse_primitive, DistributionKind, EtaSetting, ExperimentConfig, ExperimentKind};
pub use plot::{emit_plot, PlotLayout};
pub use rows::{parse_csv, sig6, sort_rows, write_csv, Measure, ResultRow, CSV_HEADER};
pub use run::{
    certify_point, run_conditions, run_convergence, run_experiment, run_histogram_demo, run_lower_bound,
    write_outputs, ExperimentRun,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] crate::error::Error),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("no rows to plot")]
    EmptySeries,
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            _ => 2,
        }
    }
}
