use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dercoord::experiment::{
    fmt_float, generate_instance, load_case, run_experiment, write_case, ExperimentConfig, InstanceSpec,
};
use dercoord::network::topology;
use dercoord::oracle::DEFAULT_BALANCE_TOL;
use dercoord::{solve_bisection, Error, Mode};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUN: u8 = 3;

#[derive(Parser)]
#[command(name = "dercoord", version, about = "Distributed economic dispatch simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm of a config on every seed and write CSV traces.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's seed list, e.g. `1,2,3`.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Solve a case with the reference solver and print p* and lambda*.
    Solve {
        case: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        /// Defaults to the number of agents.
        #[arg(long)]
        n_hat: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BALANCE_TOL)]
        tol: f64,
    },
    /// Parse and check a case file.
    Validate { case: PathBuf },
    /// Write a random case on the 39-bus topology.
    GenCase {
        #[arg(long, value_enum, default_value = "undirected")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Undirected,
    Directed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Undirected => Mode::Undirected,
            ModeArg::Directed => Mode::Directed,
        }
    }
}

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn input_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::InvalidInstance(_)
        | Error::Infeasible(_)
        | Error::InvalidGraph(_)
        | Error::Config(_)
        | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_RUN,
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, seeds: Option<Vec<u64>>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(&config) {
        Ok(cfg) => cfg,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Some(out) = out {
        cfg.output = out;
    }
    if let Some(seeds) = seeds {
        cfg.seeds = seeds;
    }
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(input_code(&e), e),
    };
    for outcome in &report.runs {
        match &outcome.result {
            Ok(s) => println!(
                "{} seed {}: final error {:.3e}, rate {}",
                outcome.label,
                outcome.seed,
                s.final_err,
                s.rate
                    .as_ref()
                    .map_or("n/a".to_string(), |r| format!("{:.6} (R^2 {:.4})", r.rate, r.r_squared)),
            ),
            Err(e) => eprintln!("{} seed {}: failed: {e}", outcome.label, outcome.seed),
        }
    }
    println!("summary written to {}", report.summary_path.display());
    if report.any_failed() {
        ExitCode::from(EXIT_RUN)
    } else {
        ExitCode::SUCCESS
    }
}

fn solve(case: PathBuf, xi: f64, n_hat: Option<f64>, tol: f64) -> ExitCode {
    let case = match load_case::<f64>(&case) {
        Ok(c) => c,
        Err(e) => return fail(input_code(&e), e),
    };
    let n_hat = n_hat.unwrap_or(case.instance.n() as f64);
    let sol = match solve_bisection(&case.instance, xi, n_hat, tol) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_RUN, e),
    };
    println!("lambda* {}", fmt_float(Some(sol.lambda_star)));
    println!("consensus {}", fmt_float(Some(sol.consensus_multiplier())));
    println!("kkt_residual {}", fmt_float(Some(sol.kkt_residual)));
    println!("total_cost {}", fmt_float(Some(case.instance.total_cost(&sol.p_star))));
    println!("i,p_star");
    for (i, p) in sol.p_star.iter().enumerate() {
        println!("{i},{}", fmt_float(Some(*p)));
    }
    ExitCode::SUCCESS
}

fn validate(case: PathBuf) -> ExitCode {
    match load_case::<f64>(&case) {
        Ok(c) => {
            println!(
                "ok: {} agents, {} {} links, total load {}",
                c.instance.n(),
                c.graph.num_edges(),
                c.graph.mode(),
                c.instance.total_load()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(input_code(&e), e),
    }
}

fn gen_case(mode: ModeArg, seed: u64, out: Option<PathBuf>) -> ExitCode {
    let graph = match Mode::from(mode) {
        Mode::Undirected => topology::ieee39_undirected(),
        Mode::Directed => topology::ieee39_directed(),
    };
    let spec = InstanceSpec {
        n: graph.n(),
        ..InstanceSpec::default()
    };
    let text = match generate_instance::<f64>(&spec, seed).and_then(|g| write_case(&g.instance, &graph)) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_RUN, e),
    };
    match out {
        Some(path) => {
            if let Err(e) = fs::write(&path, text) {
                return fail(EXIT_RUN, format!("{}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seeds } => run(config, out, seeds),
        Command::Solve { case, xi, n_hat, tol } => solve(case, xi, n_hat, tol),
        Command::Validate { case } => validate(case),
        Command::GenCase { mode, seed, out } => gen_case(mode, seed, out),
    }
}
