use crate::algorithms::AlgorithmId;
use crate::problem::AlgorithmParams;
use crate::scalar::{from_usize, sum, Scalar};

/// Invariant residuals of one step. `None` marks quantities the algorithm
/// does not carry (no tracking variable, no push-sum weights).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals<T> {
    /// `|1^T y - n_hat 1^T (p - l)|`, over the augmented vector when virtual
    /// nodes exist (their loads and outputs are zero).
    pub conservation: Option<T>,
    /// `|1^T v - n|`, augmented where applicable.
    pub mass: Option<T>,
    /// Smallest push-sum weight; virtual nodes are excluded at `k = 0`
    /// where they start empty.
    pub min_v: Option<T>,
    /// `max_ij |x_i - x_j|` over real agents.
    pub spread: T,
}

/// Snapshot of one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub k: usize,
    pub p: Vec<T>,
    /// Multiplier estimates; a single entry for the centralized iteration.
    pub lambda: Vec<T>,
    /// Ratio estimates `lambda_i / v_i` (directed algorithms only).
    pub x: Option<Vec<T>>,
    /// Imbalance estimates, real nodes first then virtual nodes.
    pub y: Option<Vec<T>>,
    /// Push-sum weights, real nodes first then virtual nodes.
    pub v: Option<Vec<T>>,
    /// `||p[k] - p*||_2`.
    pub err_p: T,
    pub residuals: Residuals<T>,
}

impl<T: Scalar> StepRecord<T> {
    /// The estimates that drive the primal update: `x` when present,
    /// otherwise `lambda`.
    pub fn consensus(&self) -> &[T] {
        self.x.as_deref().unwrap_or(&self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta<T> {
    pub algorithm: AlgorithmId,
    pub params: AlgorithmParams<T>,
    pub seed: Option<u64>,
    pub schedule_digest: Option<String>,
    pub loads: Vec<T>,
    /// Non-fatal conditions such as `xi * n_hat > n` or windows whose union
    /// graph was disconnected.
    pub warnings: Vec<String>,
}

impl<T> TraceMeta<T> {
    pub fn n(&self) -> usize {
        self.loads.len()
    }
}

/// Time-indexed record of a run: one record per step `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub meta: TraceMeta<T>,
    pub records: Vec<StepRecord<T>>,
}

impl<T: Scalar> RunTrace<T> {
    pub fn new(meta: TraceMeta<T>) -> Self {
        Self {
            meta,
            records: Vec::new(),
        }
    }

    pub fn last(&self) -> &StepRecord<T> {
        self.records.last().expect("trace holds at least the initial state")
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Computes the residuals for a snapshot from its raw vectors.
pub fn residuals_of<T: Scalar>(
    k: usize,
    p: &[T],
    consensus: &[T],
    y: Option<&[T]>,
    v: Option<&[T]>,
    loads: &[T],
    n_hat: T,
) -> Residuals<T> {
    let n = loads.len();
    let conservation = y.map(|y| {
        let imbalance: Vec<T> = p.iter().zip(loads).map(|(&pi, &li)| pi - li).collect();
        (sum(y) - n_hat * sum(&imbalance)).abs()
    });
    let mass = v.map(|v| (sum(v) - from_usize::<T>(n)).abs());
    let min_v = v.map(|v| {
        let considered = if k == 0 { &v[..n.min(v.len())] } else { v };
        considered.iter().fold(T::infinity(), |m, &x| m.min(x))
    });
    let (lo, hi) = consensus
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Residuals {
        conservation,
        mass,
        min_v,
        spread: hi - lo,
    }
}
