//! Push-sum primal-dual iteration for directed graphs with known
//! instantaneous out-degrees.

use super::{check_finite, check_positive_weights, primal_step};
use crate::error::Result;
use crate::network::SparseMatrix;
use crate::problem::{AlgorithmParams, ProblemInstance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedState<T> {
    pub p: Vec<T>,
    pub lambda: Vec<T>,
    /// Push-sum weights; their sum stays at `n`.
    pub v: Vec<T>,
    /// Ratio estimates `lambda / v`.
    pub x: Vec<T>,
    pub y: Vec<T>,
}

/// `lambda <- P (lambda - s y)`, `v <- P v`, `x = lambda / v`,
/// `y <- P y + n_hat (p[k+1] - p[k])`, with the primal step driven by `x`.
pub fn directed_pd_step<T: Scalar>(
    state: &DirectedState<T>,
    inst: &ProblemInstance<T>,
    push: &SparseMatrix<T>,
    params: &AlgorithmParams<T>,
    k: usize,
) -> Result<DirectedState<T>> {
    let s = params.step.at(k);
    let p = primal_step(inst, &state.p, &state.x, s, params.xi);
    let shifted: Vec<T> = state.lambda.iter().zip(&state.y).map(|(&l, &y)| l - s * y).collect();
    let lambda = push.mix(&shifted);
    let v = push.mix(&state.v);
    check_positive_weights(k, &v)?;
    let x = lambda.iter().zip(&v).map(|(&l, &w)| l / w).collect();
    let mut y = push.mix(&state.y);
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = *yi + params.n_hat * (p[i] - state.p[i]);
    }
    check_finite(k, &[&p, &lambda, &y])?;
    Ok(DirectedState { p, lambda, v, x, y })
}
