//! Experiment orchestration: configuration, execution with resume,
//! persistence, statistics, tables and figures.

mod config;
mod plots;
mod record;
mod report;
mod runner;
mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{BackendSpec, ExperimentConfig, RoundPolicy, SuiteConfig, SuitePreset};
pub use plots::{emit_plots, pareto_front, PlotData, PlotOutput};
pub use record::{read_records, write_records, RecordKey, RunRecord, RECORD_SCHEMA_VERSION};
pub use report::{emit_report, ReportColumn, ReportFormat, ReportRow, ReportTable};
pub use runner::{
    answers_from_transcript, experiment_layout, reevaluate, run_experiment, run_experiment_with, ExperimentLayout, Reevaluation, RunOptions,
};
pub use stats::{
    aggregate, cell_stats, propagate, summarize, AggregateOptions, AggregateReport, CellKey, CellStat, Estimate, Metric,
    SizeTaskEstimate,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Record { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Topology(#[from] crate::topology::TopologyError),
    #[error(transparent)]
    Backend(#[from] crate::agents::BackendError),
    #[error("statistics: {0}")]
    Stats(String),
    #[error("plotting: {0}")]
    Plot(String),
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
