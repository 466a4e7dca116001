//! Primal-dual iterations over undirected graphs with Metropolis mixing.

use super::{check_finite, primal_step};
use crate::error::Result;
use crate::network::SparseMatrix;
use crate::problem::{AlgorithmParams, ProblemInstance};
use crate::scalar::Scalar;

/// State of the multiplier-only iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Pd2State<T> {
    pub p: Vec<T>,
    pub lambda: Vec<T>,
}

/// State of the gradient-tracking iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedState<T> {
    pub p: Vec<T>,
    pub lambda: Vec<T>,
    /// Local estimates of `n_hat` times the network imbalance.
    pub y: Vec<T>,
}

/// `lambda <- W lambda - s n_hat (p - l)`: every agent only sees its own
/// imbalance, which needs a diminishing stepsize to converge.
pub fn pd2_step<T: Scalar>(
    state: &Pd2State<T>,
    inst: &ProblemInstance<T>,
    w: &SparseMatrix<T>,
    params: &AlgorithmParams<T>,
    k: usize,
) -> Result<Pd2State<T>> {
    let s = params.step.at(k);
    let p = primal_step(inst, &state.p, &state.lambda, s, params.xi);
    let mut lambda = w.mix(&state.lambda);
    for (i, l) in lambda.iter_mut().enumerate() {
        *l = *l - s * params.n_hat * (state.p[i] - inst.loads()[i]);
    }
    check_finite(k, &[&p, &lambda])?;
    Ok(Pd2State { p, lambda })
}

/// `lambda <- W lambda - s y`, `y <- W y + n_hat (p[k+1] - p[k])`: `y`
/// tracks the network imbalance, so a constant stepsize suffices.
pub fn pd1_step<T: Scalar>(
    state: &UndirectedState<T>,
    inst: &ProblemInstance<T>,
    w: &SparseMatrix<T>,
    params: &AlgorithmParams<T>,
    k: usize,
) -> Result<UndirectedState<T>> {
    let s = params.step.at(k);
    let p = primal_step(inst, &state.p, &state.lambda, s, params.xi);
    let mut lambda = w.mix(&state.lambda);
    for (l, &y) in lambda.iter_mut().zip(&state.y) {
        *l = *l - s * y;
    }
    let mut y = w.mix(&state.y);
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = *yi + params.n_hat * (p[i] - state.p[i]);
    }
    check_finite(k, &[&p, &lambda, &y])?;
    Ok(UndirectedState { p, lambda, y })
}
