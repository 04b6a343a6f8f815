//! Experiment driver behind the `rgta` binary: configuration files,
//! step-size tuning by simulation, seed aggregation and CSV output.

mod analyze;
mod config;
mod experiment;
mod io;

pub use analyze::{analyze, default_p_grid, AnalyzeRequest};
pub use config::{ExperimentConfig, ProblemConfig};
pub use experiment::{
    aggregate_dir, cells, prepare, reach, run_cell, run_experiment, summary_csv, tune_cell, tune_experiment,
    tuned_csv, Cell, Prepared, Reach, RunOutput, Summary, TunedResult, SUMMARY_HEADER, TUNED_HEADER,
};
pub use io::write_atomic;
