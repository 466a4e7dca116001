//! Experiment configuration, case files and the batch runner.

mod case;
mod config;
mod generate;
mod runner;

pub use case::{load_case, parse_case, write_case, Case};
pub use config::{AlgorithmConfig, ExperimentConfig, GraphSource, InstanceSource, StepConfig};
pub use generate::{generate_instance, GeneratedInstance, InstanceSpec, MAX_REJECTIONS};
pub use runner::{
    fmt_float, run_experiment, summary_csv, trace_csv, ExperimentReport, RunOutcome, RunSummary, SUMMARY_HEADER,
    TRACE_HEADER,
};
