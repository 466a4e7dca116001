//! Residual budgets, in one place.
//!
//! | check                                   | budget  |
//! |-----------------------------------------|---------|
//! | `1^T y - n_hat 1^T (p - l)`             | 1e-9    |
//! | `1^T v - n`                             | 1e-12   |
//! | column/row sums of mixing matrices      | 1e-12   |
//! | robust vs. augmented real coordinates   | 1e-12   |
//! | equilibrium drift over a run            | 1e-10   |
//! | KKT residual of the oracle              | 1e-9    |
//! | KKT residual of a settled run           | 1e-6    |
//!
//! The values are calibrated for `f64`. [`Budgets::for_scalar`] rescales
//! them by the ratio of machine epsilons for narrower types.

use crate::scalar::{lit, Scalar};

pub const CONSERVATION: f64 = 1e-9;
pub const MASS: f64 = 1e-12;
pub const STOCHASTICITY: f64 = 1e-12;
pub const EQUIVALENCE: f64 = 1e-12;
pub const FIXED_POINT: f64 = 1e-10;
pub const ORACLE_KKT: f64 = 1e-9;
pub const SETTLED_KKT: f64 = 1e-6;
/// Errors at or below this many machine epsilons (relative to the initial
/// error) are treated as round-off and excluded from rate fits.
pub const RATE_FLOOR_EPS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets<T> {
    pub conservation: T,
    pub mass: T,
    pub stochasticity: T,
    pub equivalence: T,
    pub fixed_point: T,
}

impl<T: Scalar> Budgets<T> {
    pub fn for_scalar() -> Self {
        let widen = (T::epsilon().to_f64().unwrap() / f64::EPSILON).max(1.0);
        Self {
            conservation: lit(CONSERVATION * widen),
            mass: lit(MASS * widen),
            stochasticity: lit(STOCHASTICITY * widen),
            equivalence: lit(EQUIVALENCE * widen),
            fixed_point: lit(FIXED_POINT * widen),
        }
    }
}

impl<T: Scalar> Default for Budgets<T> {
    fn default() -> Self {
        Self::for_scalar()
    }
}
