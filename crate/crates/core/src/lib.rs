//! Simulation library for distributed economic dispatch of distributed
//! energy resources.
//!
//! Agents cooperatively minimize total generation cost subject to power
//! balance and per-unit capacity limits, exchanging information over
//! time-varying undirected or directed graphs with random link failures.
//! The crate provides an exact reference solver, the distributed
//! primal-dual iterations, invariant checks and convergence-rate analysis,
//! and a config-driven experiment runner.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod algorithms;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod problem;
pub mod scalar;

pub use algorithms::{run, AlgorithmId, InitialCondition};
pub use error::{Error, Result};
pub use network::{GraphSchedule, Mode, NominalGraph};
pub use oracle::{centralized_pd_run, solve_bisection, DispatchSolution};
pub use problem::{AlgorithmParams, CostModel, ProblemInstance, StepSize};
pub use scalar::Scalar;

pub type ProblemInstanceF64 = ProblemInstance<f64>;
pub type ProblemInstanceF32 = ProblemInstance<f32>;
pub type AlgorithmParamsF64 = AlgorithmParams<f64>;
pub type AlgorithmParamsF32 = AlgorithmParams<f32>;
pub type DispatchSolutionF64 = DispatchSolution<f64>;
pub type DispatchSolutionF32 = DispatchSolution<f32>;
pub type RunTraceF64 = metrics::RunTrace<f64>;
pub type RunTraceF32 = metrics::RunTrace<f32>;
