//! The dispatch problem: choose outputs `p` inside per-agent capacity boxes so
//! that total generation equals total load at minimum total cost.
//!
//! Powers are in MW throughout; cost units are abstract.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, sum, Scalar};

/// Number of grid points per agent interval used to spot-check strong
/// convexity of user-supplied cost functions. Best effort only.
pub const CONVEXITY_SAMPLES: usize = 1000;

/// A user-supplied convex cost with explicit derivatives.
pub trait AgentCost<T>: Send + Sync {
    fn value(&self, p: T) -> T;
    fn derivative(&self, p: T) -> T;
    fn second_derivative(&self, p: T) -> T;
}

/// Per-agent generation costs.
#[derive(Clone)]
pub enum CostModel<T> {
    /// `f_i(p) = a_i p^2 + b_i p + c_i` with `a_i > 0`.
    Quadratic { a: Vec<T>, b: Vec<T>, c: Vec<T> },
    /// Arbitrary twice-differentiable costs with a declared strong-convexity
    /// modulus `m`.
    General { agents: Vec<Arc<dyn AgentCost<T>>>, m: T },
}

impl<T: fmt::Debug> fmt::Debug for CostModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostModel::Quadratic { a, b, c } => f
                .debug_struct("Quadratic")
                .field("a", a)
                .field("b", b)
                .field("c", c)
                .finish(),
            CostModel::General { agents, m } => f
                .debug_struct("General")
                .field("agents", &agents.len())
                .field("m", m)
                .finish(),
        }
    }
}

impl<T: Scalar> CostModel<T> {
    pub fn quadratic(a: Vec<T>, b: Vec<T>, c: Vec<T>) -> Self {
        CostModel::Quadratic { a, b, c }
    }

    /// Pure quadratic costs `a_i p^2`.
    pub fn pure_quadratic(a: Vec<T>) -> Self {
        let n = a.len();
        CostModel::Quadratic {
            a,
            b: vec![T::zero(); n],
            c: vec![T::zero(); n],
        }
    }

    pub fn general(agents: Vec<Arc<dyn AgentCost<T>>>, m: T) -> Self {
        CostModel::General { agents, m }
    }

    pub fn len(&self) -> usize {
        match self {
            CostModel::Quadratic { a, .. } => a.len(),
            CostModel::General { agents, .. } => agents.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize, p: T) -> T {
        match self {
            CostModel::Quadratic { a, b, c } => a[i] * p * p + b[i] * p + c[i],
            CostModel::General { agents, .. } => agents[i].value(p),
        }
    }

    pub fn derivative(&self, i: usize, p: T) -> T {
        match self {
            CostModel::Quadratic { a, b, .. } => lit::<T>(2.0) * a[i] * p + b[i],
            CostModel::General { agents, .. } => agents[i].derivative(p),
        }
    }

    pub fn second_derivative(&self, i: usize, _p: T) -> T {
        match self {
            CostModel::Quadratic { a, .. } => lit::<T>(2.0) * a[i],
            CostModel::General { agents, .. } => agents[i].second_derivative(_p),
        }
    }

    /// Declared (general) or exact (quadratic) strong-convexity modulus.
    pub fn strong_convexity(&self) -> T {
        match self {
            CostModel::Quadratic { a, .. } => a.iter().fold(T::infinity(), |m, &ai| m.min(lit::<T>(2.0) * ai)),
            CostModel::General { m, .. } => *m,
        }
    }

    /// Smallest `p` in `[lo, hi]` with `f_i'(p) >= g`, i.e. `(f_i')^{-1}(g)`
    /// clamped to the box.
    pub fn inverse_derivative(&self, i: usize, g: T, lo: T, hi: T) -> T {
        match self {
            CostModel::Quadratic { a, b, .. } => {
                let p = (g - b[i]) / (lit::<T>(2.0) * a[i]);
                p.max(lo).min(hi)
            }
            CostModel::General { .. } => {
                if self.derivative(i, lo) >= g {
                    return lo;
                }
                if self.derivative(i, hi) <= g {
                    return hi;
                }
                // Safeguarded Newton on the monotone map p -> f'(p) - g.
                let (mut a, mut b) = (lo, hi);
                let mut p = (a + b) / lit(2.0);
                for _ in 0..200 {
                    let r = self.derivative(i, p) - g;
                    if r == T::zero() {
                        return p;
                    }
                    if r > T::zero() {
                        b = p;
                    } else {
                        a = p;
                    }
                    let h = self.second_derivative(i, p);
                    let newton = p - r / h;
                    let next = if h > T::zero() && newton > a && newton < b {
                        newton
                    } else {
                        (a + b) / lit(2.0)
                    };
                    if (next - p).abs() <= T::epsilon() * (T::one() + p.abs())
                        || b - a <= T::epsilon() * (T::one() + a.abs())
                    {
                        return next;
                    }
                    p = next;
                }
                p
            }
        }
    }

    fn validate(&self, lower: &[T], upper: &[T]) -> Result<()> {
        match self {
            CostModel::Quadratic { a, b, c } => {
                if b.len() != a.len() || c.len() != a.len() {
                    return Err(Error::DimensionMismatch {
                        what: "quadratic cost coefficients",
                        expected: a.len(),
                        actual: b.len().min(c.len()),
                    });
                }
                for (i, (&ai, (&bi, &ci))) in a.iter().zip(b.iter().zip(c)).enumerate() {
                    if !(ai > T::zero()) || !ai.is_finite() || !bi.is_finite() || !ci.is_finite() {
                        return Err(Error::InvalidCost {
                            agent: i,
                            reason: format!("quadratic coefficient a = {ai} must be positive and finite"),
                        });
                    }
                }
                Ok(())
            }
            CostModel::General { agents, m } => {
                if !(*m > T::zero()) {
                    return Err(Error::InvalidCost {
                        agent: 0,
                        reason: format!("declared strong-convexity modulus m = {m} must be positive"),
                    });
                }
                let steps = from_usize::<T>(CONVEXITY_SAMPLES - 1);
                for (i, f) in agents.iter().enumerate() {
                    let (lo, hi) = (lower[i], upper[i]);
                    for t in 0..CONVEXITY_SAMPLES {
                        let p = lo + (hi - lo) * from_usize::<T>(t) / steps;
                        let h = f.second_derivative(p);
                        if !(h >= *m) {
                            return Err(Error::InvalidCost {
                                agent: i,
                                reason: format!("f''({p}) = {h} below declared modulus {m}"),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// A validated dispatch instance.
#[derive(Debug, Clone)]
pub struct ProblemInstance<T> {
    loads: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    cost: CostModel<T>,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(loads: Vec<T>, lower: Vec<T>, upper: Vec<T>, cost: CostModel<T>) -> Result<Self> {
        let n = loads.len();
        if n == 0 {
            return Err(Error::InvalidInstance("instance has no agents".into()));
        }
        for (what, len) in [
            ("lower caps", lower.len()),
            ("upper caps", upper.len()),
            ("cost model", cost.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    actual: len,
                });
            }
        }
        for i in 0..n {
            if !(lower[i].is_finite() && upper[i].is_finite() && loads[i].is_finite()) {
                return Err(Error::InvalidInstance(format!("agent {i} has non-finite data")));
            }
            if lower[i] > upper[i] {
                return Err(Error::InvalidInstance(format!(
                    "agent {i}: lower cap {} exceeds upper cap {}",
                    lower[i], upper[i]
                )));
            }
        }
        let (total_lo, total_load, total_hi) = (sum(&lower), sum(&loads), sum(&upper));
        if total_lo > total_load {
            return Err(Error::Infeasible(format!(
                "sum of lower caps {total_lo} exceeds total load {total_load}"
            )));
        }
        if total_load > total_hi {
            return Err(Error::Infeasible(format!(
                "total load {total_load} exceeds sum of upper caps {total_hi}"
            )));
        }
        cost.validate(&lower, &upper)?;
        Ok(Self {
            loads,
            lower,
            upper,
            cost,
        })
    }

    pub fn n(&self) -> usize {
        self.loads.len()
    }

    pub fn loads(&self) -> &[T] {
        &self.loads
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn cost(&self) -> &CostModel<T> {
        &self.cost
    }

    pub fn total_load(&self) -> T {
        sum(&self.loads)
    }

    pub fn total_cost(&self, p: &[T]) -> T {
        p.iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &pi)| acc + self.cost.value(i, pi))
    }

    /// Relabels agents: agent `perm[i]` of the result is agent `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let apply = |v: &[T]| {
            let mut out = vec![T::zero(); n];
            for (i, &x) in v.iter().enumerate() {
                out[perm[i]] = x;
            }
            out
        };
        let cost = match &self.cost {
            CostModel::Quadratic { a, b, c } => CostModel::Quadratic {
                a: apply(a),
                b: apply(b),
                c: apply(c),
            },
            CostModel::General { agents, m } => {
                let mut out = agents.clone();
                for (i, f) in agents.iter().enumerate() {
                    out[perm[i]] = f.clone();
                }
                CostModel::General { agents: out, m: *m }
            }
        };
        Self::new(apply(&self.loads), apply(&self.lower), apply(&self.upper), cost)
    }

    /// Default starting point: zero output clamped into each box.
    pub fn default_start(&self) -> Vec<T> {
        project_box(&vec![T::zero(); self.n()], &self.lower, &self.upper).expect("validated boxes")
    }

    fn check_len(&self, what: &'static str, actual: usize) -> Result<()> {
        if actual != self.n() {
            return Err(Error::DimensionMismatch {
                what,
                expected: self.n(),
                actual,
            });
        }
        Ok(())
    }
}

/// Stepsize rule shared by all iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize<T> {
    Constant(T),
    /// `s[k] = a / (k + b)`.
    Diminishing {
        a: T,
        b: T,
    },
}

impl<T: Scalar> StepSize<T> {
    pub fn at(&self, k: usize) -> T {
        match *self {
            StepSize::Constant(s) => s,
            StepSize::Diminishing { a, b } => a / (from_usize::<T>(k) + b),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSize::Constant(s) => s > T::zero() && s.is_finite(),
            StepSize::Diminishing { a, b } => a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid stepsize {self:?}")))
        }
    }
}

/// Tuning knobs of the primal-dual iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmParams<T> {
    pub step: StepSize<T>,
    /// Scaling of the multiplier in the primal update.
    pub xi: T,
    /// Every agent's estimate of the population size.
    pub n_hat: T,
    /// Running-sum mixing weight, only used by the robust algorithm.
    pub gamma: T,
    pub horizon: usize,
}

impl<T: Scalar> AlgorithmParams<T> {
    pub fn constant(step: T, xi: T, n_hat: T, horizon: usize) -> Self {
        Self {
            step: StepSize::Constant(step),
            xi,
            n_hat,
            gamma: lit(0.9),
            horizon,
        }
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if !(self.xi > T::zero()) || !self.xi.is_finite() {
            return Err(Error::Config(format!("xi = {} must be positive", self.xi)));
        }
        if !(self.n_hat > T::zero()) || !self.n_hat.is_finite() {
            return Err(Error::Config(format!("n_hat = {} must be positive", self.n_hat)));
        }
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return Err(Error::Config(format!("gamma = {} must lie in (0, 1)", self.gamma)));
        }
        Ok(())
    }

    /// `xi * n_hat / n`, the factor linking consensus multipliers to the
    /// marginal cost at the optimum.
    pub fn scale(&self, n: usize) -> T {
        self.xi * self.n_hat / from_usize(n)
    }

    /// Convergence guarantees need `xi * n_hat <= n`. Outside that range the
    /// run still proceeds; the returned message is recorded as a warning.
    pub fn scaling_warning(&self, n: usize) -> Option<String> {
        let bound = from_usize::<T>(n);
        (self.xi * self.n_hat > bound).then(|| {
            format!(
                "xi * n_hat = {} exceeds n = {n}; convergence is not guaranteed",
                self.xi * self.n_hat
            )
        })
    }
}

/// Gradient of the separable cost, `(f_1'(p_1), ..., f_n'(p_n))`.
pub fn cost_grad<T: Scalar>(cost: &CostModel<T>, p: &[T]) -> Result<Vec<T>> {
    if p.len() != cost.len() {
        return Err(Error::DimensionMismatch {
            what: "power vector",
            expected: cost.len(),
            actual: p.len(),
        });
    }
    Ok(p.iter().enumerate().map(|(i, &pi)| cost.derivative(i, pi)).collect())
}

/// Componentwise projection onto `[lo, hi]`.
pub fn project_box<T: Scalar>(p: &[T], lo: &[T], hi: &[T]) -> Result<Vec<T>> {
    if lo.len() != p.len() || hi.len() != p.len() {
        return Err(Error::DimensionMismatch {
            what: "box bounds",
            expected: p.len(),
            actual: lo.len().min(hi.len()),
        });
    }
    p.iter()
        .zip(lo.iter().zip(hi))
        .enumerate()
        .map(|(i, (&x, (&l, &h)))| {
            if l > h {
                Err(Error::InvalidInstance(format!(
                    "agent {i}: lower bound {l} exceeds upper bound {h}"
                )))
            } else {
                Ok(x.max(l).min(h))
            }
        })
        .collect()
}

/// Largest violation of the optimality conditions at `(p, lambda)`.
///
/// Stationarity uses the scaled multiplier `xi * (n_hat / n) * lambda`, which
/// is the fixed point of every distributed iteration in this crate. An agent
/// sitting on its upper cap only violates stationarity when its marginal cost
/// exceeds the scaled multiplier (a non-negative upper-cap multiplier absorbs
/// the rest); the lower cap is symmetric. Distance outside the box also counts.
pub fn kkt_residual<T: Scalar>(inst: &ProblemInstance<T>, p: &[T], lambda: T, xi: T, n_hat: T) -> Result<T> {
    inst.check_len("power vector", p.len())?;
    let n = inst.n();
    let target = xi * n_hat / from_usize::<T>(n) * lambda;
    let imbalance: Vec<T> = p.iter().zip(inst.loads()).map(|(&pi, &li)| pi - li).collect();
    let mut worst = sum(&imbalance).abs();
    for i in 0..n {
        let (lo, hi, pi) = (inst.lower[i], inst.upper[i], p[i]);
        let outside = (lo - pi).max(pi - hi).max(T::zero());
        let gap = inst.cost.derivative(i, pi) - target;
        let stationarity = match (pi >= hi, pi <= lo) {
            (true, true) => T::zero(),
            (true, false) => gap.max(T::zero()),
            (false, true) => (-gap).max(T::zero()),
            (false, false) => gap.abs(),
        };
        worst = worst.max(outside).max(stationarity);
    }
    Ok(worst)
}
