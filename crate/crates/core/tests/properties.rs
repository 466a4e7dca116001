use dercoord::algorithms::{run, AlgorithmId, InitialCondition};
use dercoord::experiment::{generate_instance, InstanceSpec};
use dercoord::metrics::{budgets, invariant_report, Budgets};
use dercoord::network::topology::{directed_ring, random_connected, ring};
use dercoord::problem::kkt_residual;
use dercoord::scalar::max_abs_diff;
use dercoord::{centralized_pd_run, solve_bisection, AlgorithmParams, GraphSchedule, Mode, ProblemInstance};
use proptest::prelude::*;

fn instance(n: usize, seed: u64) -> ProblemInstance<f64> {
    let spec = InstanceSpec {
        n,
        b: [0.0, 1.0],
        ..InstanceSpec::default()
    };
    generate_instance(&spec, seed).unwrap().instance
}

fn params_for(id: AlgorithmId, n: usize, horizon: usize) -> AlgorithmParams<f64> {
    match id {
        AlgorithmId::Robust | AlgorithmId::Virtual | AlgorithmId::Directed => {
            AlgorithmParams::constant(0.02, 0.2, (n as f64).min(20.0), horizon).with_gamma(0.9)
        }
        _ => AlgorithmParams::constant(0.01, 0.05, n as f64, horizon),
    }
}

fn graph_for(id: AlgorithmId, n: usize, extra: usize, seed: u64) -> dercoord::NominalGraph {
    let mode = id.mode().unwrap_or(Mode::Undirected);
    random_connected(n, extra, mode, seed)
}

fn scaled_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / 1f64.max(x.abs()).max(y.abs()))
        .fold(0.0, f64::max)
}

const DISTRIBUTED: [AlgorithmId; 5] = [
    AlgorithmId::Pd2,
    AlgorithmId::Pd1,
    AlgorithmId::Directed,
    AlgorithmId::Robust,
    AlgorithmId::Virtual,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_is_permutation_equivariant(n in 1usize..30, seed in any::<u64>(), shift in 0usize..30) {
        let inst = instance(n, seed);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let a = solve_bisection(&inst, 0.05, n as f64, 1e-12).unwrap();
        let b = solve_bisection(&inst.permuted(&perm).unwrap(), 0.05, n as f64, 1e-12).unwrap();
        let back: Vec<f64> = (0..n).map(|i| b.p_star[perm[i]]).collect();
        prop_assert!(scaled_gap(&a.p_star, &back) < 1e-9);
        prop_assert!((a.lambda_star - b.lambda_star).abs() < 1e-9 * a.lambda_star.abs().max(1.0));
    }

    #[test]
    fn distributed_runs_are_permutation_equivariant(
        alg in prop::sample::select(DISTRIBUTED.to_vec()),
        n in 2usize..9,
        seed in any::<u64>(),
        shift in 1usize..9,
        q in prop::sample::select(vec![0.0, 0.3]),
    ) {
        let inst = instance(n, seed);
        let graph = graph_for(alg, n, n / 2, seed);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let params = params_for(alg, n, 150);
        let a = run(alg, &inst, &GraphSchedule::new(graph.clone(), q, seed, 150).unwrap(), &params, &InitialCondition::default()).unwrap();
        let sched = GraphSchedule::new(graph.permuted(&perm).unwrap(), q, seed, 150).unwrap();
        let b = run(alg, &inst.permuted(&perm).unwrap(), &sched, &params, &InitialCondition::default()).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            let back: Vec<f64> = (0..n).map(|i| rb.p[perm[i]]).collect();
            prop_assert!(scaled_gap(&ra.p, &back) < 1e-9, "k = {}", ra.k);
        }
    }

    #[test]
    fn single_agent_reduces_to_centralized(
        alg in prop::sample::select(DISTRIBUTED.to_vec()),
        seed in any::<u64>(),
        step in 0.001f64..0.05,
        xi in 0.05f64..1.0,
    ) {
        let inst = instance(1, seed);
        let graph = match alg.mode() {
            Some(Mode::Directed) => directed_ring(1),
            _ => ring(1),
        };
        let params = AlgorithmParams::constant(step, xi, 1.0, 300).with_gamma(0.9);
        let dist = run(alg, &inst, &GraphSchedule::reliable(graph, 300), &params, &InitialCondition::default()).unwrap();
        let cent = centralized_pd_run(&inst, &params, &inst.default_start(), 0.0).unwrap();
        for (a, b) in dist.records.iter().zip(&cent.records) {
            prop_assert!((a.p[0] - b.p[0]).abs() <= 1e-12 * a.p[0].abs().max(1.0), "k = {}", a.k);
            prop_assert!((a.consensus()[0] - b.lambda[0]).abs() <= 1e-12 * b.lambda[0].abs().max(1.0));
        }
    }

    #[test]
    fn conservation_and_mass_hold_under_failures(
        alg in prop::sample::select(DISTRIBUTED.to_vec()),
        n in 1usize..15,
        extra in 0usize..10,
        seed in any::<u64>(),
        q in 0.0f64..0.7,
    ) {
        let inst = instance(n, seed);
        let graph = graph_for(alg, n, extra, seed);
        let params = params_for(alg, n, 400);
        let trace = run(alg, &inst, &GraphSchedule::new(graph, q, seed, 400).unwrap(), &params, &InitialCondition::default()).unwrap();
        let report = invariant_report(&trace);
        prop_assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn equilibrium_is_a_fixed_point(
        alg in prop::sample::select(vec![AlgorithmId::Pd1, AlgorithmId::Directed, AlgorithmId::Robust, AlgorithmId::Virtual]),
        n in 1usize..12,
        seed in any::<u64>(),
        q in 0.0f64..0.5,
    ) {
        let inst = instance(n, seed);
        let graph = graph_for(alg, n, n, seed);
        let params = params_for(alg, n, 300);
        let sol = solve_bisection(&inst, params.xi, params.n_hat, 1e-13).unwrap();
        let sched = GraphSchedule::new(graph, q, seed, 300).unwrap();
        let trace = run(alg, &inst, &sched, &params, &InitialCondition::equilibrium(&sol)).unwrap();
        let first = &trace.records[0];
        for r in &trace.records {
            prop_assert!(max_abs_diff(&r.p, &first.p) <= 1e-10);
            prop_assert!(max_abs_diff(r.consensus(), first.consensus()) <= 1e-10);
        }
    }

    #[test]
    fn robust_matches_virtual_without_failures(n in 2usize..10, extra in 0usize..20, seed in any::<u64>()) {
        let inst = instance(n, seed);
        let graph = random_connected(n, extra, Mode::Directed, seed);
        let params = params_for(AlgorithmId::Robust, n, 200);
        let sched = GraphSchedule::reliable(graph, 200);
        let a = run(AlgorithmId::Robust, &inst, &sched, &params, &InitialCondition::default()).unwrap();
        let b = run(AlgorithmId::Virtual, &inst, &sched, &params, &InitialCondition::default()).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            prop_assert!(max_abs_diff(&ra.p, &rb.p) <= 1e-12);
            prop_assert!(max_abs_diff(ra.consensus(), rb.consensus()) <= 1e-12);
            prop_assert!(max_abs_diff(&ra.v.as_ref().unwrap()[..n], &rb.v.as_ref().unwrap()[..n]) <= 1e-12);
        }
    }
}

#[test]
fn f32_pd1_converges_within_its_precision() {
    let spec = InstanceSpec {
        n: 8,
        ..InstanceSpec::default()
    };
    let inst = generate_instance::<f32>(&spec, 4).unwrap().instance;
    let params = AlgorithmParams::<f32>::constant(0.01, 0.05, 8.0, 4000);
    let sched = GraphSchedule::new(random_connected(8, 4, Mode::Undirected, 4), 0.2, 4, 4000).unwrap();
    let trace = run(AlgorithmId::Pd1, &inst, &sched, &params, &InitialCondition::default()).unwrap();
    let first = trace.records[0].err_p;
    let last = trace.last().err_p;
    assert!(last < 1e-3 * first, "{first} -> {last}");
    let report = invariant_report(&trace);
    let budgets = Budgets::<f32>::for_scalar();
    assert!(report.conservation.unwrap().max <= budgets.conservation, "{report:?}");
}

#[test]
fn f32_robust_keeps_mass_within_its_budget() {
    let spec = InstanceSpec {
        n: 6,
        ..InstanceSpec::default()
    };
    let inst = generate_instance::<f32>(&spec, 9).unwrap().instance;
    let params = AlgorithmParams::<f32>::constant(0.02, 0.2, 6.0, 2000).with_gamma(0.9);
    let sched = GraphSchedule::new(random_connected(6, 4, Mode::Directed, 9), 0.2, 9, 2000).unwrap();
    let trace = run(
        AlgorithmId::Robust,
        &inst,
        &sched,
        &params,
        &InitialCondition::default(),
    )
    .unwrap();
    assert!(invariant_report(&trace).passed());
    assert!(trace.last().err_p < 1e-2 * trace.records[0].err_p);
}

#[test]
fn settled_iterates_satisfy_kkt() {
    for alg in [AlgorithmId::Pd1, AlgorithmId::Directed, AlgorithmId::Robust] {
        let mut settled = 0;
        for seed in 0..10u64 {
            let n = 3 + seed as usize % 6;
            let inst = instance(n, seed);
            let params = params_for(alg, n, 20_000);
            let sched = GraphSchedule::new(graph_for(alg, n, n, seed), 0.2, seed, 20_000).unwrap();
            let trace = run(alg, &inst, &sched, &params, &InitialCondition::default()).unwrap();
            let last = trace.last();
            let prev = &trace.records[trace.len() - 2];
            if last.residuals.spread > 1e-8 || max_abs_diff(&last.p, &prev.p) > 1e-10 {
                continue;
            }
            settled += 1;
            let x_bar = last.consensus().iter().sum::<f64>() / n as f64;
            let lambda = x_bar * n as f64 / params.n_hat;
            let kkt = kkt_residual(&inst, &last.p, lambda, params.xi, params.n_hat).unwrap();
            assert!(kkt <= budgets::SETTLED_KKT, "{alg} seed {seed}: kkt {kkt:.2e}");
        }
        assert!(settled >= 8, "{alg}: only {settled} of 10 runs settled");
    }
}
