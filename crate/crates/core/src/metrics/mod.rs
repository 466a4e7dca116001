//! Convergence errors, rate fits and invariant summaries computed from
//! recorded runs.

pub mod budgets;
mod rate;
mod report;
mod trace;

pub use budgets::Budgets;
pub use rate::{
    consensus_deviation, convergence_error, default_window, fit_rate, tracking_gap, weighted_norm, RateEstimate,
};
pub use report::{invariant_report, push_sum_weight_floor, Check, InvariantReport};
pub use trace::{residuals_of, Residuals, RunTrace, StepRecord, TraceMeta};
