//! Exact solution by bisection on the balance multiplier, and the
//! centralized projected primal-dual iteration used as a baseline.
//!
//! Multipliers are reported in the scaled convention of the distributed
//! iterations: at the optimum every unsaturated agent satisfies
//! `f_i'(p_i) = xi * (n_hat / n) * lambda*`. The value each agent's local
//! estimate settles at is `(n_hat / n) * lambda*`, see
//! [`DispatchSolution::consensus_multiplier`]. The raw multiplier of the
//! balance constraint is the marginal cost `xi * (n_hat / n) * lambda*`.

use crate::algorithms::AlgorithmId;
use crate::error::{Error, Result};
use crate::metrics::{residuals_of, RunTrace, StepRecord, TraceMeta};
use crate::problem::{kkt_residual, project_box, AlgorithmParams, ProblemInstance};
use crate::scalar::{all_finite, dist2, from_usize, lit, sum, Scalar};

/// Default power-balance tolerance of the bisection.
pub const DEFAULT_BALANCE_TOL: f64 = 1e-12;

const MAX_BISECTION_STEPS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution<T> {
    pub p_star: Vec<T>,
    pub lambda_star: T,
    /// Upper-cap multipliers.
    pub mu_star: Vec<T>,
    /// Lower-cap multipliers.
    pub nu_star: Vec<T>,
    pub kkt_residual: T,
    pub xi: T,
    pub n_hat: T,
    pub iterations: usize,
}

impl<T: Scalar> DispatchSolution<T> {
    pub fn n(&self) -> usize {
        self.p_star.len()
    }

    /// `xi * (n_hat / n) * lambda*`: the common marginal cost of unsaturated agents.
    pub fn marginal_cost(&self) -> T {
        self.xi * self.consensus_multiplier()
    }

    /// `(n_hat / n) * lambda*`: where every local multiplier estimate (or
    /// ratio estimate) settles in the distributed iterations.
    pub fn consensus_multiplier(&self) -> T {
        self.n_hat / from_usize(self.n()) * self.lambda_star
    }
}

/// Bracket history of a bisection, for inspection in tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionLog<T> {
    pub brackets: Vec<(T, T)>,
}

/// Solves the dispatch problem to power-balance tolerance `tol`.
pub fn solve_bisection<T: Scalar>(inst: &ProblemInstance<T>, xi: T, n_hat: T, tol: T) -> Result<DispatchSolution<T>> {
    solve_bisection_logged(inst, xi, n_hat, tol).map(|(s, _)| s)
}

pub fn solve_bisection_logged<T: Scalar>(
    inst: &ProblemInstance<T>,
    xi: T,
    n_hat: T,
    tol: T,
) -> Result<(DispatchSolution<T>, BisectionLog<T>)> {
    if !(xi > T::zero() && n_hat > T::zero()) {
        return Err(Error::Config(format!("xi = {xi} and n_hat = {n_hat} must be positive")));
    }
    let n = inst.n();
    let cost = inst.cost();
    if !(cost.strong_convexity() > T::zero()) {
        return Err(Error::InvalidCost {
            agent: 0,
            reason: "marginal cost is not invertible (m <= 0)".into(),
        });
    }
    let (lo, hi) = (inst.lower(), inst.upper());
    let demand = inst.total_load();
    let (sum_lo, sum_hi) = (sum(lo), sum(hi));
    if sum_lo > demand || demand > sum_hi {
        return Err(Error::Infeasible(format!(
            "need sum(lower) <= total load <= sum(upper), got {sum_lo} <= {demand} <= {sum_hi}"
        )));
    }
    let scale = xi * n_hat / from_usize::<T>(n);
    let dispatch = |lambda: T| -> Vec<T> {
        (0..n)
            .map(|i| cost.inverse_derivative(i, scale * lambda, lo[i], hi[i]))
            .collect()
    };
    let imbalance = |p: &[T]| sum(p) - demand;

    let mut a = (0..n).fold(T::infinity(), |m, i| m.min(cost.derivative(i, lo[i]))) / scale - T::one();
    let mut b = (0..n).fold(T::neg_infinity(), |m, i| m.max(cost.derivative(i, hi[i]))) / scale + T::one();
    let mut log = BisectionLog { brackets: vec![(a, b)] };

    let (pa, pb) = (dispatch(a), dispatch(b));
    let (ga, gb) = (imbalance(&pa), imbalance(&pb));
    let mut best = if ga.abs() <= gb.abs() { (a, pa, ga) } else { (b, pb, gb) };
    let mut iterations = 0;
    while best.2.abs() > tol && iterations < MAX_BISECTION_STEPS {
        let mid = a + (b - a) / lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        let p = dispatch(mid);
        let g = imbalance(&p);
        if g < T::zero() {
            a = mid;
        } else {
            b = mid;
        }
        log.brackets.push((a, b));
        if g.abs() <= best.2.abs() {
            best = (mid, p, g);
        }
    }

    let (lambda, p, _) = best;
    let target = scale * lambda;
    let mut mu = vec![T::zero(); n];
    let mut nu = vec![T::zero(); n];
    for i in 0..n {
        let gap = target - cost.derivative(i, p[i]);
        if p[i] >= hi[i] && gap > T::zero() {
            mu[i] = gap;
        } else if p[i] <= lo[i] && gap < T::zero() {
            nu[i] = -gap;
        }
    }
    let kkt = kkt_residual(inst, &p, lambda, xi, n_hat)?;
    Ok((
        DispatchSolution {
            p_star: p,
            lambda_star: lambda,
            mu_star: mu,
            nu_star: nu,
            kkt_residual: kkt,
            xi,
            n_hat,
            iterations,
        },
        log,
    ))
}

/// Runs the centralized projected primal-dual iteration
/// `p <- proj(p - s grad f(p) + s xi lambda_bar)`,
/// `lambda_bar <- lambda_bar - s 1^T (p - l)` for `params.horizon` steps.
///
/// `lambda_bar` lives in the consensus convention: its equilibrium is
/// [`DispatchSolution::consensus_multiplier`].
pub fn centralized_pd_run<T: Scalar>(
    inst: &ProblemInstance<T>,
    params: &AlgorithmParams<T>,
    p0: &[T],
    lambda0: T,
) -> Result<RunTrace<T>> {
    params.validate()?;
    let solution = solve_bisection(inst, params.xi, params.n_hat, lit(DEFAULT_BALANCE_TOL))?;
    centralized_pd_run_against(inst, params, p0, lambda0, &solution)
}

pub(crate) fn centralized_pd_run_against<T: Scalar>(
    inst: &ProblemInstance<T>,
    params: &AlgorithmParams<T>,
    p0: &[T],
    lambda0: T,
    solution: &DispatchSolution<T>,
) -> Result<RunTrace<T>> {
    let mut p = project_box(p0, inst.lower(), inst.upper())?;
    if p.len() != inst.n() {
        return Err(Error::DimensionMismatch {
            what: "initial power vector",
            expected: inst.n(),
            actual: p.len(),
        });
    }
    let mut lambda = lambda0;
    let mut trace = RunTrace::new(TraceMeta {
        algorithm: AlgorithmId::Centralized,
        params: *params,
        seed: None,
        schedule_digest: None,
        loads: inst.loads().to_vec(),
        warnings: params.scaling_warning(inst.n()).into_iter().collect(),
    });
    let record = |k: usize, p: &[T], lambda: T| StepRecord {
        k,
        p: p.to_vec(),
        lambda: vec![lambda],
        x: None,
        y: None,
        v: None,
        err_p: dist2(p, &solution.p_star),
        residuals: residuals_of(k, p, &[lambda], None, None, inst.loads(), params.n_hat),
    };
    trace.records.push(record(0, &p, lambda));
    for k in 0..params.horizon {
        let s = params.step.at(k);
        let imbalance: Vec<T> = p.iter().zip(inst.loads()).map(|(&pi, &li)| pi - li).collect();
        let next: Vec<T> = (0..inst.n())
            .map(|i| {
                let raw = p[i] - s * inst.cost().derivative(i, p[i]) + s * params.xi * lambda;
                raw.max(inst.lower()[i]).min(inst.upper()[i])
            })
            .collect();
        lambda = lambda - s * sum(&imbalance);
        p = next;
        if !all_finite(&p) || !lambda.is_finite() {
            return Err(Error::Divergence { k: k + 1 });
        }
        trace.records.push(record(k + 1, &p, lambda));
    }
    Ok(trace)
}
