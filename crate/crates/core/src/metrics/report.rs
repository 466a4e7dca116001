use super::budgets::Budgets;
use super::trace::{residuals_of, RunTrace};
use crate::network::augmented_entry_floor;
use crate::scalar::{from_usize, Scalar};

/// Largest residual of one invariant over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check<T> {
    pub max: T,
    pub budget: T,
    /// First step whose residual exceeded the budget.
    pub first_violation: Option<usize>,
}

impl<T: Scalar> Check<T> {
    fn new(budget: T) -> Self {
        Self {
            max: T::zero(),
            budget,
            first_violation: None,
        }
    }

    fn observe(&mut self, k: usize, value: T) {
        if !(value <= self.max) {
            self.max = value;
        }
        if !(value <= self.budget) && self.first_violation.is_none() {
            self.first_violation = Some(k);
        }
    }

    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport<T> {
    pub conservation: Option<Check<T>>,
    pub mass: Option<Check<T>>,
    /// Smallest push-sum weight seen and the step where it occurred.
    pub min_v: Option<(T, usize)>,
    /// First step (k >= 1) where some weight was not strictly positive.
    pub nonpositive_v: Option<usize>,
    pub spread_max: T,
    pub spread_final: T,
}

impl<T: Scalar> InvariantReport<T> {
    pub fn passed(&self) -> bool {
        self.conservation.as_ref().is_none_or(Check::passed)
            && self.mass.as_ref().is_none_or(Check::passed)
            && self.nonpositive_v.is_none()
    }

    /// Ratio between the smallest observed weight and a theoretical floor.
    pub fn v_floor_margin(&self, floor: T) -> Option<T> {
        self.min_v.map(|(v, _)| v / floor)
    }
}

/// Recomputes every residual from the stored vectors (not from the residuals
/// cached in the records) and compares against the default budgets.
pub fn invariant_report<T: Scalar>(trace: &RunTrace<T>) -> InvariantReport<T> {
    let budgets = Budgets::<T>::default();
    let mut conservation = None;
    let mut mass = None;
    let mut min_v: Option<(T, usize)> = None;
    let mut nonpositive_v = None;
    let mut spread_max = T::zero();
    let mut spread_final = T::zero();
    for r in &trace.records {
        let res = residuals_of(
            r.k,
            &r.p,
            r.consensus(),
            r.y.as_deref(),
            r.v.as_deref(),
            &trace.meta.loads,
            trace.meta.params.n_hat,
        );
        if let Some(c) = res.conservation {
            conservation
                .get_or_insert_with(|| Check::new(budgets.conservation))
                .observe(r.k, c);
        }
        if let Some(m) = res.mass {
            mass.get_or_insert_with(|| Check::new(budgets.mass)).observe(r.k, m);
        }
        if let Some(v) = res.min_v {
            if min_v.is_none_or(|(best, _)| v < best) {
                min_v = Some((v, r.k));
            }
            if r.k >= 1 && !(v > T::zero()) && nonpositive_v.is_none() {
                nonpositive_v = Some(r.k);
            }
        }
        spread_max = spread_max.max(res.spread);
        spread_final = res.spread;
    }
    InvariantReport {
        conservation,
        mass,
        min_v,
        nonpositive_v,
        spread_max,
        spread_final,
    }
}

/// Guaranteed lower bound `((1 - gamma)/n) tau^{N (2B - 1)}` on the push-sum
/// weights of the augmented system for `k >= 1`, where `N` counts real and
/// virtual nodes and every window of `b` steps is strongly connected.
pub fn push_sum_weight_floor<T: Scalar>(gamma: T, n: usize, total: usize, b: usize) -> T {
    let tau = augmented_entry_floor(gamma, n);
    let exponent = from_usize::<T>(total * (2 * b).saturating_sub(1));
    (T::one() - gamma) / from_usize::<T>(n) * tau.powf(exponent)
}
