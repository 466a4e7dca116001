//! Distributed primal-dual iterations as pure step functions, and a driver
//! that runs any of them against a failure schedule.

mod directed;
mod robust;
mod undirected;
mod virtual_domain;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use directed::{directed_pd_step, DirectedState};
pub use robust::{robust_pd_step, Channels, RobustState};
pub use undirected::{pd1_step, pd2_step, Pd2State, UndirectedState};
pub use virtual_domain::{virtual_domain_step, VirtualState};

use crate::error::{Error, Result};
use crate::metrics::{residuals_of, RunTrace, StepRecord, TraceMeta};
use crate::network::{metropolis_weights, push_matrix, GraphSchedule, Mode, VirtualIndexMap};
use crate::oracle::{centralized_pd_run_against, solve_bisection, DispatchSolution, DEFAULT_BALANCE_TOL};
use crate::problem::{project_box, AlgorithmParams, ProblemInstance};
use crate::scalar::{all_finite, dist2, from_usize, lit, sum, Scalar};

/// Window length used for the connectivity warnings attached to a trace.
pub const CONNECTIVITY_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmId {
    /// Projected primal-dual iteration with a global multiplier.
    Centralized,
    /// Undirected, local imbalance only (diminishing stepsize).
    Pd2,
    /// Undirected with imbalance tracking.
    Pd1,
    /// Push-sum with known instantaneous out-degrees.
    Directed,
    /// Running-sum push-sum with nominal out-degrees only.
    Robust,
    /// Augmented-system form of `Robust`.
    Virtual,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::Centralized,
        AlgorithmId::Pd2,
        AlgorithmId::Pd1,
        AlgorithmId::Directed,
        AlgorithmId::Robust,
        AlgorithmId::Virtual,
    ];

    /// Graph mode the algorithm runs on; `None` for the centralized baseline.
    pub fn mode(self) -> Option<Mode> {
        match self {
            AlgorithmId::Centralized => None,
            AlgorithmId::Pd1 | AlgorithmId::Pd2 => Some(Mode::Undirected),
            AlgorithmId::Directed | AlgorithmId::Robust | AlgorithmId::Virtual => Some(Mode::Directed),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Centralized => "centralized",
            AlgorithmId::Pd2 => "pd2",
            AlgorithmId::Pd1 => "pd1",
            AlgorithmId::Directed => "directed",
            AlgorithmId::Robust => "robust",
            AlgorithmId::Virtual => "virtual",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// Starting point of a run. Missing pieces take their defaults:
/// `p = 0` clamped to the box, `lambda = 0`, `y = n_hat (p - l)`.
/// Push-sum weights always start at one, so `x[0] = lambda[0]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitialCondition<T> {
    pub p0: Option<Vec<T>>,
    pub lambda0: Option<Vec<T>>,
    pub y0: Option<Vec<T>>,
}

impl<T: Scalar> InitialCondition<T> {
    pub fn with_p0(p0: Vec<T>) -> Self {
        Self {
            p0: Some(p0),
            ..Self::default()
        }
    }

    /// The equilibrium of the distributed iterations: `p = p*`, every
    /// multiplier estimate at the consensus value and `y = 0`.
    ///
    /// `y = n_hat (p* - l)` is balanced only in aggregate, so it is not a
    /// fixed point agent by agent.
    pub fn equilibrium(solution: &DispatchSolution<T>) -> Self {
        let n = solution.n();
        Self {
            p0: Some(solution.p_star.clone()),
            lambda0: Some(vec![solution.consensus_multiplier(); n]),
            y0: Some(vec![T::zero(); n]),
        }
    }

    /// Resolved `(p0, lambda0, y0)` for an instance.
    pub fn resolve(&self, inst: &ProblemInstance<T>, n_hat: T) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
        let n = inst.n();
        let p0 = match &self.p0 {
            Some(p) => project_box(p, inst.lower(), inst.upper())?,
            None => inst.default_start(),
        };
        let lambda0 = self.lambda0.clone().unwrap_or_else(|| vec![T::zero(); n]);
        let y0 = self
            .y0
            .clone()
            .unwrap_or_else(|| p0.iter().zip(inst.loads()).map(|(&p, &l)| n_hat * (p - l)).collect());
        for (what, len) in [("initial lambda", lambda0.len()), ("initial y", y0.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what: if what == "initial lambda" {
                        "initial lambda"
                    } else {
                        "initial y"
                    },
                    expected: n,
                    actual: len,
                });
            }
        }
        if !all_finite(&p0) || !all_finite(&lambda0) || !all_finite(&y0) {
            return Err(Error::Config("initial condition contains non-finite values".into()));
        }
        Ok((p0, lambda0, y0))
    }
}

/// `proj(p - s grad f(p) + s xi est)`, agent by agent.
pub(crate) fn primal_step<T: Scalar>(inst: &ProblemInstance<T>, p: &[T], est: &[T], s: T, xi: T) -> Vec<T> {
    let cost = inst.cost();
    (0..p.len())
        .map(|i| {
            let raw = p[i] - s * cost.derivative(i, p[i]) + s * xi * est[i];
            raw.max(inst.lower()[i]).min(inst.upper()[i])
        })
        .collect()
}

pub(crate) fn check_finite<T: Scalar>(k: usize, parts: &[&[T]]) -> Result<()> {
    if parts.iter().all(|v| all_finite(v)) {
        Ok(())
    } else {
        Err(Error::Divergence { k: k + 1 })
    }
}

pub(crate) fn check_positive_weights<T: Scalar>(k: usize, v: &[T]) -> Result<()> {
    match v.iter().position(|&w| !(w > T::zero())) {
        None => Ok(()),
        Some(i) => Err(Error::InvariantViolation {
            k: k + 1,
            what: format!("push-sum weight v[{i}] = {} is not positive", v[i]),
        }),
    }
}

struct Recorder<'a, T> {
    solution: &'a DispatchSolution<T>,
    loads: &'a [T],
    n_hat: T,
}

impl<T: Scalar> Recorder<'_, T> {
    fn record(
        &self,
        k: usize,
        p: &[T],
        lambda: &[T],
        x: Option<&[T]>,
        y: Option<&[T]>,
        v: Option<&[T]>,
    ) -> StepRecord<T> {
        let consensus = x.unwrap_or(lambda);
        StepRecord {
            k,
            p: p.to_vec(),
            lambda: lambda.to_vec(),
            x: x.map(<[T]>::to_vec),
            y: y.map(<[T]>::to_vec),
            v: v.map(<[T]>::to_vec),
            err_p: dist2(p, &self.solution.p_star),
            residuals: residuals_of(k, p, consensus, y, v, self.loads, self.n_hat),
        }
    }
}

/// Runs `id` for `params.horizon` steps on the links sampled from
/// `schedule`, recording every iterate together with its distance to the
/// oracle solution and the invariant residuals.
///
/// For the robust and virtual algorithms `lambda`, `v` and `y` in the
/// records are augmented vectors (real nodes first), and `x` holds the real
/// ratio estimates.
pub fn run<T: Scalar>(
    id: AlgorithmId,
    inst: &ProblemInstance<T>,
    schedule: &GraphSchedule,
    params: &AlgorithmParams<T>,
    init: &InitialCondition<T>,
) -> Result<RunTrace<T>> {
    params.validate()?;
    let solution = solve_bisection(inst, params.xi, params.n_hat, lit(DEFAULT_BALANCE_TOL))?;
    run_against(id, inst, schedule, params, init, &solution)
}

/// [`run`] with a precomputed oracle solution (same `xi` and `n_hat`).
pub fn run_against<T: Scalar>(
    id: AlgorithmId,
    inst: &ProblemInstance<T>,
    schedule: &GraphSchedule,
    params: &AlgorithmParams<T>,
    init: &InitialCondition<T>,
    solution: &DispatchSolution<T>,
) -> Result<RunTrace<T>> {
    params.validate()?;
    let (p0, lambda0, y0) = init.resolve(inst, params.n_hat)?;
    if id == AlgorithmId::Centralized {
        let lambda_bar = sum(&lambda0) / from_usize(inst.n());
        return centralized_pd_run_against(inst, params, &p0, lambda_bar, solution);
    }

    let graph = schedule.nominal();
    let expected = id.mode().expect("distributed algorithms have a mode");
    if graph.mode() != expected {
        return Err(Error::Config(format!(
            "algorithm {id} needs a {expected} graph, got a {} one",
            graph.mode()
        )));
    }
    if graph.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            what: "graph nodes",
            expected: inst.n(),
            actual: graph.n(),
        });
    }
    if schedule.horizon() < params.horizon {
        return Err(Error::Config(format!(
            "schedule horizon {} is shorter than the run horizon {}",
            schedule.horizon(),
            params.horizon
        )));
    }

    let mut warnings: Vec<String> = params.scaling_warning(inst.n()).into_iter().collect();
    if schedule.q() > 0.0 {
        let windows = GraphSchedule::new(graph.clone(), schedule.q(), schedule.seed(), params.horizon)?
            .check_b_connectivity(CONNECTIVITY_WINDOW);
        let bad = windows.iter().filter(|&&ok| !ok).count();
        if bad > 0 {
            warnings.push(format!(
                "{bad} of {} windows of {CONNECTIVITY_WINDOW} steps had a disconnected union graph",
                windows.len()
            ));
        }
    }
    let mut trace = RunTrace::new(TraceMeta {
        algorithm: id,
        params: *params,
        seed: Some(schedule.seed()),
        schedule_digest: Some(schedule.digest()),
        loads: inst.loads().to_vec(),
        warnings,
    });
    let rec = Recorder {
        solution,
        loads: inst.loads(),
        n_hat: params.n_hat,
    };
    let n = inst.n();
    let records = &mut trace.records;
    records.reserve(params.horizon + 1);

    match id {
        AlgorithmId::Centralized => unreachable!(),
        AlgorithmId::Pd2 => {
            let mut st = Pd2State { p: p0, lambda: lambda0 };
            records.push(rec.record(0, &st.p, &st.lambda, None, None, None));
            for k in 0..params.horizon {
                let w = metropolis_weights(graph, &schedule.sample_active(k));
                st = pd2_step(&st, inst, &w, params, k)?;
                records.push(rec.record(k + 1, &st.p, &st.lambda, None, None, None));
            }
        }
        AlgorithmId::Pd1 => {
            let mut st = UndirectedState {
                p: p0,
                lambda: lambda0,
                y: y0,
            };
            records.push(rec.record(0, &st.p, &st.lambda, None, Some(&st.y), None));
            for k in 0..params.horizon {
                let w = metropolis_weights(graph, &schedule.sample_active(k));
                st = pd1_step(&st, inst, &w, params, k)?;
                records.push(rec.record(k + 1, &st.p, &st.lambda, None, Some(&st.y), None));
            }
        }
        AlgorithmId::Directed => {
            let x0 = lambda0.clone();
            let mut st = DirectedState {
                p: p0,
                lambda: lambda0,
                v: vec![T::one(); n],
                x: x0,
                y: y0,
            };
            let push =
                |st: &DirectedState<T>, k| rec.record(k, &st.p, &st.lambda, Some(&st.x), Some(&st.y), Some(&st.v));
            records.push(push(&st, 0));
            for k in 0..params.horizon {
                let mix = push_matrix(graph, &schedule.sample_active(k));
                st = directed_pd_step(&st, inst, &mix, params, k)?;
                records.push(push(&st, k + 1));
            }
        }
        AlgorithmId::Robust => {
            let mut st = RobustState::new(graph, p0, lambda0, vec![T::one(); n], y0)?;
            let push = |st: &RobustState<T>, k| {
                let aug = st.augmented();
                rec.record(k, &st.p, &aug.lambda, Some(&st.x), Some(&aug.y), Some(&aug.v))
            };
            records.push(push(&st, 0));
            for k in 0..params.horizon {
                st = robust_pd_step(&st, inst, graph, &schedule.sample_active(k), params, k)?;
                records.push(push(&st, k + 1));
            }
        }
        AlgorithmId::Virtual => {
            let map = VirtualIndexMap::new(graph);
            let mut st = VirtualState::new(&map, p0, lambda0, vec![T::one(); n], y0)?;
            let push =
                |st: &VirtualState<T>, k| rec.record(k, &st.p, &st.lambda, Some(&st.x[..n]), Some(&st.y), Some(&st.v));
            records.push(push(&st, 0));
            for k in 0..params.horizon {
                st = virtual_domain_step(&st, inst, graph, &schedule.sample_active(k), params, &map, k)?;
                records.push(push(&st, k + 1));
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in AlgorithmId::ALL {
            assert_eq!(id.to_string().parse::<AlgorithmId>().unwrap(), id);
        }
        assert!("pd3".parse::<AlgorithmId>().is_err());
    }
}
