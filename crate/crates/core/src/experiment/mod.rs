//! Declarative experiments over datasets, classifiers and search methods.

mod config;
mod report;
mod runner;

pub use config::{
    DatasetSpec, ExperimentConfig, GaOverrides, Method, Profile, SequentialOverrides, SpsaOverrides, METHOD_NAMES,
};
pub use report::{emit_trace, read_result, render_table, write_outputs, TRACE_HEADER};
pub use runner::{cell_seed, run_cell, run_experiment, CellRecord, CellSummary, ComparisonEntry, ExperimentReport};
