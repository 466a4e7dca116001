//! Packet-loss robust push-sum iteration: nodes broadcast running sums and
//! receivers keep per-link mirrors, so mass lost on a failed link is
//! recovered from the next delivered broadcast. Only nominal out-degrees are
//! needed.

use super::{check_finite, check_positive_weights, primal_step};
use crate::error::{Error, Result};
use crate::network::{ActiveLinks, Mode, NominalGraph};
use crate::problem::{AlgorithmParams, ProblemInstance};
use crate::scalar::{from_usize, Compensated, Scalar};

/// One accumulator per mixed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Channels<C> {
    pub lambda: C,
    pub v: C,
    pub y: C,
}

/// Node states plus running sums and link mirrors.
///
/// Running sums and mirrors grow linearly with the iteration count while
/// the updates only use their differences, so they are kept in compensated
/// form. The self-pair mirror of node `i` always equals its own running sum
/// and is not stored separately.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustState<T> {
    pub p: Vec<T>,
    pub lambda: Vec<T>,
    pub v: Vec<T>,
    pub x: Vec<T>,
    pub y: Vec<T>,
    /// Per node: `sum_{t < k} q_j[t] / d_j` for each quantity `q`.
    sums: Vec<Channels<Compensated<T>>>,
    /// Per nominal arc `(j, i)`, held by the receiver `i`.
    mirrors: Vec<Channels<Compensated<T>>>,
    sources: Vec<usize>,
}

impl<T: Scalar> RobustState<T> {
    /// Fresh state with empty running sums and mirrors.
    pub fn new(graph: &NominalGraph, p: Vec<T>, lambda: Vec<T>, v: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = graph.n();
        for (what, len) in [("p", p.len()), ("lambda", lambda.len()), ("v", v.len()), ("y", y.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what: match what {
                        "p" => "robust initial p",
                        "lambda" => "robust initial lambda",
                        "v" => "robust initial v",
                        _ => "robust initial y",
                    },
                    expected: n,
                    actual: len,
                });
            }
        }
        let x = lambda.iter().zip(&v).map(|(&l, &w)| l / w).collect();
        let zero = Channels {
            lambda: Compensated::zero(),
            v: Compensated::zero(),
            y: Compensated::zero(),
        };
        Ok(Self {
            p,
            lambda,
            v,
            x,
            y,
            sums: vec![zero; n],
            mirrors: vec![zero; graph.num_edges()],
            sources: graph.edges().iter().map(|&(j, _)| j).collect(),
        })
    }

    /// Current mirror values of arc `e`.
    pub fn mirror(&self, e: usize) -> Channels<T> {
        let m = &self.mirrors[e];
        Channels {
            lambda: m.lambda.value(),
            v: m.v.value(),
            y: m.y.value(),
        }
    }

    /// Broadcast running sums of node `j` (through the previous step).
    pub fn running_sum(&self, j: usize) -> Channels<T> {
        let s = &self.sums[j];
        Channels {
            lambda: s.lambda.value(),
            v: s.v.value(),
            y: s.y.value(),
        }
    }

    /// Mass sent on each arc but not yet absorbed by its receiver,
    /// `running_sum(j) - mirror(e)`, i.e. the states of the virtual nodes of
    /// the augmented system.
    pub fn in_flight(&self) -> Channels<Vec<T>> {
        let mut out = Channels {
            lambda: Vec::with_capacity(self.mirrors.len()),
            v: Vec::with_capacity(self.mirrors.len()),
            y: Vec::with_capacity(self.mirrors.len()),
        };
        for (m, &j) in self.mirrors.iter().zip(&self.sources) {
            let s = &self.sums[j];
            out.lambda.push(s.lambda.diff(&m.lambda));
            out.v.push(s.v.diff(&m.v));
            out.y.push(s.y.diff(&m.y));
        }
        out
    }

    /// Real states followed by the in-flight (virtual) states.
    pub fn augmented(&self) -> Channels<Vec<T>> {
        let flight = self.in_flight();
        let join = |real: &[T], virt: Vec<T>| real.iter().copied().chain(virt).collect();
        Channels {
            lambda: join(&self.lambda, flight.lambda),
            v: join(&self.v, flight.v),
            y: join(&self.y, flight.y),
        }
    }
}

/// One synchronous round.
///
/// Every node adds `q_j[k] / d_j` to its running sums and broadcasts them.
/// For each delivered arc `(j, i)` the receiver moves its mirror a fraction
/// `gamma` of the way to the broadcast value; the increment is the mass
/// absorbed this round. Node updates are the sums of mirror increments over
/// in-arcs plus the self share `q_i[k] / d_i`:
/// `lambda_i <- sum (d lambda_ij - s d y_ij)`, `v_i <- sum d v_ij`,
/// `y_i <- sum d y_ij + n_hat (p_i[k+1] - p_i[k])`.
pub fn robust_pd_step<T: Scalar>(
    state: &RobustState<T>,
    inst: &ProblemInstance<T>,
    graph: &NominalGraph,
    active: &ActiveLinks,
    params: &AlgorithmParams<T>,
    k: usize,
) -> Result<RobustState<T>> {
    if graph.mode() != Mode::Directed {
        return Err(Error::Config("the robust iteration needs a directed graph".into()));
    }
    let n = graph.n();
    let s = params.step.at(k);
    let gamma = params.gamma;
    let d: Vec<T> = graph.degrees().into_iter().map(from_usize).collect();
    let p = primal_step(inst, &state.p, &state.x, s, params.xi);

    let mut sums = state.sums.clone();
    for j in 0..n {
        sums[j].lambda.add(state.lambda[j] / d[j]);
        sums[j].v.add(state.v[j] / d[j]);
        sums[j].y.add(state.y[j] / d[j]);
    }

    let mut lambda: Vec<T> = (0..n).map(|i| (state.lambda[i] - s * state.y[i]) / d[i]).collect();
    let mut v: Vec<T> = (0..n).map(|i| state.v[i] / d[i]).collect();
    let mut y: Vec<T> = (0..n).map(|i| state.y[i] / d[i]).collect();
    let mut mirrors = state.mirrors.clone();
    for (e, &(j, i)) in graph.edges().iter().enumerate() {
        if !active.is_up(e) {
            continue;
        }
        let m = &mut mirrors[e];
        let dl = gamma * sums[j].lambda.diff(&m.lambda);
        let dv = gamma * sums[j].v.diff(&m.v);
        let dy = gamma * sums[j].y.diff(&m.y);
        m.lambda.add(dl);
        m.v.add(dv);
        m.y.add(dy);
        lambda[i] = lambda[i] + (dl - s * dy);
        v[i] = v[i] + dv;
        y[i] = y[i] + dy;
    }
    for i in 0..n {
        y[i] = y[i] + params.n_hat * (p[i] - state.p[i]);
    }
    check_positive_weights(k, &v)?;
    let x: Vec<T> = lambda.iter().zip(&v).map(|(&l, &w)| l / w).collect();
    check_finite(k, &[&p, &lambda, &y])?;
    Ok(RobustState {
        p,
        lambda,
        v,
        x,
        y,
        sums,
        mirrors,
        sources: state.sources.clone(),
    })
}
