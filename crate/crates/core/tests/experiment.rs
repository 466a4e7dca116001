use std::fs;
use std::path::{Path, PathBuf};

use dercoord::experiment::{
    fmt_float, generate_instance, load_case, parse_case, run_experiment, write_case, ExperimentConfig, InstanceSpec,
};
use dercoord::metrics::{default_window, fit_rate};
use dercoord::network::is_connected;
use dercoord::Mode;

fn cases_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

#[test]
fn default_spec_yields_feasible_instances() {
    let spec = InstanceSpec::default();
    for seed in 0..100 {
        let g = generate_instance::<f64>(&spec, seed).unwrap();
        let inst = &g.instance;
        assert_eq!(inst.n(), spec.n);
        let lo: f64 = inst.lower().iter().sum();
        let hi: f64 = inst.upper().iter().sum();
        assert!(lo <= inst.total_load() && inst.total_load() <= hi, "seed {seed}");
        assert!(g.attempts >= 1);
    }
}

#[test]
fn shipped_cases_load_and_round_trip() {
    for (name, mode) in [
        ("ieee39_undirected.case", Mode::Undirected),
        ("ieee39_directed.case", Mode::Directed),
    ] {
        let case = load_case::<f64>(cases_dir().join(name)).unwrap();
        assert_eq!(case.instance.n(), 39);
        assert_eq!(case.graph.mode(), mode);
        let up = vec![true; case.graph.num_edges()];
        assert!(is_connected(39, case.graph.edges(), &up, mode));
        let text = write_case(&case.instance, &case.graph).unwrap();
        let again = parse_case::<f64>(&text).unwrap();
        assert_eq!(again.graph, case.graph);
        assert_eq!(again.instance.loads(), case.instance.loads());
        assert_eq!(again.instance.upper(), case.instance.upper());
        assert_eq!(write_case(&again.instance, &again.graph).unwrap(), text);
    }
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.instance.case.as_ref().unwrap().exists(), "{}", path.display());
    }
}

fn small_config(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse(
        r#"
        horizon = 600
        q = 0.2
        seeds = [1, 2, 3]
        output = "unused"
        mode = "directed"
        [instance.random]
        n = 8
        [graph]
        kind = "random"
        extra = 6
        seed = 5
        [[algorithm]]
        id = "robust"
        step = 0.02
        xi = 0.2
        [[algorithm]]
        id = "virtual"
        step = 0.02
        xi = 0.2
        "#,
    )
    .unwrap();
    cfg.output = out.to_path_buf();
    cfg
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn summary_rates_match_a_refit_of_the_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small_config(dir.path())).unwrap();
    assert!(!report.any_failed());
    let summary = fs::read_to_string(&report.summary_path).unwrap();
    let labels = column(&summary, "label");
    let seeds = column(&summary, "seed");
    let rates = column(&summary, "rate");
    let finals = column(&summary, "final_err");
    for i in 0..labels.len() {
        let trace = fs::read_to_string(dir.path().join(&labels[i]).join(format!("trace_{}.csv", seeds[i]))).unwrap();
        let errs: Vec<f64> = column(&trace, "err_p").iter().map(|s| s.parse().unwrap()).collect();
        let fit = fit_rate(&errs, default_window(&errs).unwrap()).unwrap();
        assert_eq!(rates[i], fmt_float(Some(fit.rate)));
        assert_eq!(finals[i], fmt_float(errs.last().copied()));
    }
}

#[test]
fn experiments_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_experiment(&small_config(&a)).unwrap();
    run_experiment(&small_config(&b)).unwrap();
    for rel in ["summary.csv", "robust/trace_1.csv", "virtual/trace_3.csv"] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn empty_seed_list_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut cfg = small_config(&out);
    cfg.seeds.clear();
    assert!(run_experiment(&cfg).is_err());
    assert!(!out.exists());
}

#[test]
fn csv_floats_round_trip_losslessly() {
    for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 6.02e23, f64::MIN_POSITIVE] {
        assert_eq!(fmt_float(Some(x)).parse::<f64>().unwrap(), x);
    }
    assert_eq!(fmt_float(None), "NaN");
}
