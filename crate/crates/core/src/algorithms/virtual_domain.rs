//! The robust iteration rewritten over an augmented system with one
//! virtual node per nominal arc, mixed by a fixed-degree column-stochastic
//! matrix. Used as an independent reference for the robust iteration.

use super::{check_finite, check_positive_weights, primal_step};
use crate::error::{Error, Result};
use crate::network::{augmented_push_matrix, ActiveLinks, NominalGraph, VirtualIndexMap};
use crate::problem::{AlgorithmParams, ProblemInstance};
use crate::scalar::Scalar;

/// Augmented vectors: real nodes `0..n`, then virtual nodes `n..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualState<T> {
    /// Real outputs only; virtual nodes produce nothing.
    pub p: Vec<T>,
    pub lambda: Vec<T>,
    pub v: Vec<T>,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> VirtualState<T> {
    /// Pads real initial values with empty virtual nodes (`x = 0` there).
    pub fn new(map: &VirtualIndexMap, p: Vec<T>, lambda: Vec<T>, v: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = map.real();
        for len in [p.len(), lambda.len(), v.len(), y.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what: "augmented initial state",
                    expected: n,
                    actual: len,
                });
            }
        }
        let pad = |mut real: Vec<T>| {
            real.resize(map.total(), T::zero());
            real
        };
        let mut x: Vec<T> = lambda.iter().zip(&v).map(|(&l, &w)| l / w).collect();
        x.resize(map.total(), T::zero());
        Ok(Self {
            p,
            lambda: pad(lambda),
            v: pad(v),
            x,
            y: pad(y),
        })
    }

    pub fn real(&self) -> usize {
        self.p.len()
    }
}

/// `lambda <- P~ lambda - s I~ P~ y`, `v <- P~ v`,
/// `y <- P~ y + n_hat (p[k+1] - p[k])`, where `I~` keeps real rows only:
/// virtual nodes hold in-flight multiplier mass without the tracker
/// correction, which is applied on delivery.
pub fn virtual_domain_step<T: Scalar>(
    state: &VirtualState<T>,
    inst: &ProblemInstance<T>,
    graph: &NominalGraph,
    active: &ActiveLinks,
    params: &AlgorithmParams<T>,
    map: &VirtualIndexMap,
    k: usize,
) -> Result<VirtualState<T>> {
    let n = state.real();
    let s = params.step.at(k);
    let mix = augmented_push_matrix(graph, active, params.gamma, map);
    let p = primal_step(inst, &state.p, &state.x[..n], s, params.xi);

    let mut lambda = mix.mix(&state.lambda);
    let mixed_y = mix.mix(&state.y);
    for i in 0..n {
        lambda[i] = lambda[i] - s * mixed_y[i];
    }
    let v = mix.mix(&state.v);
    check_positive_weights(k, &v[..n])?;
    let x = lambda.iter().zip(&v).map(|(&l, &w)| l / w).collect();
    let mut y = mixed_y;
    for i in 0..n {
        y[i] = y[i] + params.n_hat * (p[i] - state.p[i]);
    }
    check_finite(k, &[&p, &lambda, &y])?;
    Ok(VirtualState { p, lambda, v, x, y })
}
