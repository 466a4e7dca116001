//! Batch execution of a config: every algorithm on every seed, in parallel,
//! with per-run trace CSVs and one summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::case::load_case;
use super::config::{ExperimentConfig, GraphSource};
use super::generate::generate_instance;
use crate::algorithms::{run_against, InitialCondition};
use crate::error::{Error, Result};
use crate::metrics::{default_window, fit_rate, invariant_report, RateEstimate, RunTrace};
use crate::network::{topology, GraphSchedule, Mode, NominalGraph};
use crate::oracle::solve_bisection;
use crate::problem::ProblemInstance;

pub const TRACE_HEADER: &str = "k,err_p,consensus_spread,conservation_residual,mass_residual,min_v";
pub const SUMMARY_HEADER: &str = "label,algorithm,seed,status,final_err,rate,r_squared,fit_k0,fit_k1,\
max_conservation,max_mass,min_v,final_spread,warnings";

/// Outcome of one (algorithm, seed) run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub algorithm: String,
    pub seed: u64,
    pub result: std::result::Result<RunSummary, String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_err: f64,
    pub initial_err: f64,
    pub rate: Option<RateEstimate<f64>>,
    pub max_conservation: Option<f64>,
    pub max_mass: Option<f64>,
    pub min_v: Option<f64>,
    pub final_spread: f64,
    pub warnings: Vec<String>,
    pub trace_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    pub summary_path: PathBuf,
}

impl ExperimentReport {
    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.result.is_err())
    }
}

/// 17 significant digits, `NaN` for absent values.
pub fn fmt_float(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.16e}"),
        None => "NaN".to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn trace_csv(trace: &RunTrace<f64>) -> String {
    let mut out = String::with_capacity(trace.len() * 128);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let res = &r.residuals;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            fmt_float(Some(r.err_p)),
            fmt_float(Some(res.spread)),
            fmt_float(res.conservation),
            fmt_float(res.mass),
            fmt_float(res.min_v)
        );
    }
    out
}

/// Writes through a temporary sibling and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn summarize(trace: &RunTrace<f64>, trace_path: PathBuf) -> RunSummary {
    let errs: Vec<f64> = trace.records.iter().map(|r| r.err_p).collect();
    let rate = default_window(&errs).and_then(|w| fit_rate(&errs, w).ok());
    let report = invariant_report(trace);
    RunSummary {
        final_err: trace.last().err_p,
        initial_err: errs[0],
        rate,
        max_conservation: report.conservation.map(|c| c.max),
        max_mass: report.mass.map(|c| c.max),
        min_v: report.min_v.map(|(v, _)| v),
        final_spread: report.spread_final,
        warnings: trace.meta.warnings.clone(),
        trace_path,
    }
}

pub fn summary_csv(runs: &[RunOutcome]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for run in runs {
        let row = match &run.result {
            Ok(s) => {
                let (rate, r2, k0, k1) = match &s.rate {
                    Some(f) => (
                        fmt_float(Some(f.rate)),
                        fmt_float(Some(f.r_squared)),
                        f.k0.to_string(),
                        f.k1.to_string(),
                    ),
                    None => ("NaN".into(), "NaN".into(), String::new(), String::new()),
                };
                [
                    "ok".to_string(),
                    fmt_float(Some(s.final_err)),
                    rate,
                    r2,
                    k0,
                    k1,
                    fmt_float(s.max_conservation),
                    fmt_float(s.max_mass),
                    fmt_float(s.min_v),
                    fmt_float(Some(s.final_spread)),
                    csv_field(&s.warnings.join("; ")),
                ]
                .join(",")
            }
            Err(msg) => format!("{},NaN,NaN,NaN,,,NaN,NaN,NaN,NaN,", csv_field(&format!("error: {msg}"))),
        };
        let _ = writeln!(out, "{},{},{},{}", csv_field(&run.label), run.algorithm, run.seed, row);
    }
    out
}

/// The fixed parts of an experiment, loaded once before any run.
struct Inputs {
    case: Option<(ProblemInstance<f64>, NominalGraph)>,
    graph: NominalGraph,
}

fn build_graph(cfg: &ExperimentConfig, n: usize, case_graph: Option<&NominalGraph>) -> Result<NominalGraph> {
    let mode = cfg.mode;
    let graph = match &cfg.graph {
        GraphSource::Case => case_graph.cloned().expect("validated: case graph present"),
        GraphSource::File { path } => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            text.parse()?
        }
        GraphSource::Ieee39 => {
            if n != 39 {
                return Err(Error::Config(format!(
                    "the 39-bus graph needs 39 agents, the instance has {n}"
                )));
            }
            match mode.expect("validated") {
                Mode::Undirected => topology::ieee39_undirected(),
                Mode::Directed => topology::ieee39_directed(),
            }
        }
        GraphSource::Ring => match mode.expect("validated") {
            Mode::Undirected => topology::ring(n),
            Mode::Directed => topology::directed_ring(n),
        },
        GraphSource::Random { extra, seed } => topology::random_connected(n, *extra, mode.expect("validated"), *seed),
    };
    if let Some(mode) = mode {
        if graph.mode() != mode {
            return Err(Error::Config(format!(
                "config mode is {mode} but the graph is {}",
                graph.mode()
            )));
        }
    }
    for alg in &cfg.algorithms {
        if let Some(needed) = alg.id.mode() {
            if needed != graph.mode() {
                return Err(Error::Config(format!(
                    "algorithm '{}' needs a {needed} graph, the graph is {}",
                    alg.label(),
                    graph.mode()
                )));
            }
        }
    }
    if graph.n() != n {
        return Err(Error::Config(format!(
            "graph has {} nodes, the instance has {n} agents",
            graph.n()
        )));
    }
    Ok(graph)
}

fn load_inputs(cfg: &ExperimentConfig) -> Result<Inputs> {
    cfg.validate()?;
    let case = match &cfg.instance.case {
        Some(path) => {
            let c = load_case::<f64>(path)?;
            Some((c.instance, c.graph))
        }
        None => None,
    };
    let n = match (&case, &cfg.instance.random) {
        (Some((inst, _)), _) => inst.n(),
        (None, Some(spec)) => spec.n,
        (None, None) => unreachable!("validated"),
    };
    let graph = build_graph(cfg, n, case.as_ref().map(|(_, g)| g))?;
    Ok(Inputs { case, graph })
}

fn run_one(cfg: &ExperimentConfig, inputs: &Inputs, alg: usize, seed: u64) -> Result<(RunTrace<f64>, PathBuf)> {
    let alg = &cfg.algorithms[alg];
    let instance = match (&inputs.case, &cfg.instance.random) {
        (Some((inst, _)), _) => inst.clone(),
        (None, Some(spec)) => generate_instance::<f64>(spec, cfg.instance.seed.unwrap_or(seed))?.instance,
        (None, None) => unreachable!("validated"),
    };
    let graph = inputs.graph.clone();
    let params = alg.params(instance.n(), cfg.horizon);
    let schedule = GraphSchedule::new(graph, cfg.q, seed, cfg.horizon)?;
    let solution = solve_bisection(&instance, params.xi, params.n_hat, cfg.oracle_tol)?;
    let trace = run_against(
        alg.id,
        &instance,
        &schedule,
        &params,
        &InitialCondition::default(),
        &solution,
    )?;
    let path = cfg.output.join(alg.label()).join(format!("trace_{seed}.csv"));
    write_atomic(&path, &trace_csv(&trace))?;
    Ok((trace, path))
}

/// Validates the config, runs every (algorithm, seed) pair and writes the
/// artifacts. Returns `Err` only for configuration problems detected before
/// any run; failures of individual runs are reported in the outcome list
/// while the remaining runs still execute.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let inputs = load_inputs(cfg)?;
    let jobs: Vec<(usize, u64)> = (0..cfg.algorithms.len())
        .flat_map(|a| cfg.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let runs: Vec<RunOutcome> = jobs
        .par_iter()
        .map(|&(a, seed)| {
            let result = run_one(cfg, &inputs, a, seed)
                .map(|(trace, path)| summarize(&trace, path))
                .map_err(|e| e.to_string());
            RunOutcome {
                label: cfg.algorithms[a].label(),
                algorithm: cfg.algorithms[a].id.to_string(),
                seed,
                result,
            }
        })
        .collect();
    let summary_path = cfg.output.join("summary.csv");
    write_atomic(&summary_path, &summary_csv(&runs))?;
    Ok(ExperimentReport { runs, summary_path })
}
