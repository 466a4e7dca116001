use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dercoord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dercoord"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL_CASE: &str = "\
3
0.5 0 0 0 4 2.0
1.0 0 0 0 4 1.0
2.0 0 0 0 4 1.5
3 3 directed
0 1
1 2
2 0
";

fn small_config(dir: &Path, seeds: &str) -> std::path::PathBuf {
    fs::write(dir.join("small.case"), SMALL_CASE).unwrap();
    let cfg = format!(
        r#"
horizon = 300
q = 0.2
seeds = {seeds}
output = "out"
[instance]
case = "small.case"
[graph]
kind = "case"
[[algorithm]]
id = "robust"
step = 0.05
xi = 0.2
n_hat = 3
[[algorithm]]
id = "directed"
step = 0.05
xi = 0.2
"#
    );
    let path = dir.join("small.toml");
    fs::write(&path, cfg).unwrap();
    path
}

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "[1, 2]");
    let out = dercoord(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for label in ["robust", "directed"] {
        for seed in [1, 2] {
            let trace = fs::read_to_string(dir.path().join(format!("out/{label}/trace_{seed}.csv"))).unwrap();
            assert!(trace.starts_with("k,err_p,consensus_spread,conservation_residual,mass_residual,min_v\n"));
            assert_eq!(trace.lines().count(), 302);
        }
    }
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "[3, 4, 5]");
    let cfg = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(dercoord(&["run", cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(dercoord(&["run", cfg, "--out", b.to_str().unwrap()]).status.success());
    for rel in ["summary.csv", "robust/trace_3.csv", "directed/trace_5.csv"] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn seeds_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "[1]");
    let out = dercoord(&["run", cfg.to_str().unwrap(), "--seeds", "7,8"]);
    assert!(out.status.success());
    assert!(dir.path().join("out/robust/trace_8.csv").exists());
    assert!(!dir.path().join("out/robust/trace_1.csv").exists());
}

#[test]
fn empty_seed_list_is_a_config_error_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "[]");
    let out = dercoord(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "horizon = 10\nseeds = [1]\noutput = \"o\"\nbogus = 1\n").unwrap();
    assert_eq!(dercoord(&["run", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dercoord(&["run", "/nonexistent/config.toml"]).status.code(), Some(2));
}

#[test]
fn failed_runs_exit_with_run_error_and_still_write_summary() {
    // Every drawn instance is infeasible, so each run fails in the generator.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.toml");
    fs::write(
        &path,
        r#"
horizon = 10
seeds = [1, 2]
output = "out"
mode = "undirected"
[instance.random]
n = 3
load = [10.0, 10.0]
upper = [1.0, 1.0]
[graph]
kind = "ring"
[[algorithm]]
id = "pd1"
step = 0.01
xi = 0.05
"#,
    )
    .unwrap();
    let out = dercoord(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.contains("generator"));
}

#[test]
fn solve_prints_dispatch() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("c.case");
    fs::write(&case, SMALL_CASE).unwrap();
    let out = dercoord(&["solve", case.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // Pure quadratic costs 0.5, 1, 2 sharing 4.5 units: p = 4.5 * (4, 2, 1) / 7.
    let p: Vec<f64> = text
        .lines()
        .skip_while(|l| *l != "i,p_star")
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (got, want) in p.iter().zip([18.0 / 7.0, 9.0 / 7.0, 4.5 / 7.0]) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!(text.starts_with("lambda* "));
}

#[test]
fn validate_reports_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("bad.case");
    fs::write(&case, SMALL_CASE.replace("1.0 0 0 0 4 1.0", "1.0 0 0 5 4 1.0")).unwrap();
    let out = dercoord(&["validate", case.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(&case, SMALL_CASE).unwrap();
    assert!(dercoord(&["validate", case.to_str().unwrap()]).status.success());
}

#[test]
fn shipped_cases_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases");
    for name in ["ieee39_undirected.case", "ieee39_directed.case"] {
        let out = dercoord(&["validate", root.join(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("39 agents"));
    }
}

#[test]
fn gen_case_is_deterministic() {
    let a = dercoord(&["gen-case", "--mode", "directed", "--seed", "39"]);
    let b = dercoord(&["gen-case", "--mode", "directed", "--seed", "39"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let shipped = fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases/ieee39_directed.case")).unwrap();
    assert_eq!(a.stdout, shipped);
}
