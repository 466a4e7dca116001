//! Random feasible instances: quadratic costs with random curvature, random
//! loads and random capacity boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{CostModel, ProblemInstance};
use crate::scalar::{lit, Scalar};

/// Consecutive infeasible draws tolerated before giving up.
pub const MAX_REJECTIONS: usize = 1000;

/// Closed ranges `[lo, hi]` for every drawn quantity; `lo == hi` pins it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceSpec {
    pub n: usize,
    /// Quadratic coefficient, must be positive.
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    /// Load in MW.
    pub load: [f64; 2],
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            n: 39,
            a: [0.1, 1.0],
            b: [0.0, 0.0],
            c: [0.0, 0.0],
            load: [1.0, 10.0],
            lower: [0.0, 0.0],
            upper: [5.0, 15.0],
        }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Generator("n must be at least 1".into()));
        }
        let ranges = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("load", self.load),
            ("lower", self.lower),
            ("upper", self.upper),
        ];
        for (name, [lo, hi]) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Generator(format!(
                    "range {name} = [{lo}, {hi}] is not a finite interval"
                )));
            }
        }
        if !(self.a[0] > 0.0) {
            return Err(Error::Generator(format!(
                "a range must be positive, got [{}, {}]",
                self.a[0], self.a[1]
            )));
        }
        Ok(())
    }
}

/// A drawn instance and the number of draws it took.
#[derive(Debug, Clone)]
pub struct GeneratedInstance<T> {
    pub instance: ProblemInstance<T>,
    pub attempts: usize,
}

fn draw(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    let u: f64 = rng.gen();
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * u
    }
}

/// Deterministic per `(spec, seed)`. Draws whose boxes are inverted or
/// cannot meet the total load are rejected and redrawn.
pub fn generate_instance<T: Scalar>(spec: &InstanceSpec, seed: u64) -> Result<GeneratedInstance<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_REJECTIONS {
        let n = spec.n;
        let mut cols: [Vec<f64>; 6] = Default::default();
        for _ in 0..n {
            for (col, range) in cols
                .iter_mut()
                .zip([spec.a, spec.b, spec.c, spec.load, spec.lower, spec.upper])
            {
                col.push(draw(&mut rng, range));
            }
        }
        let [a, b, c, load, lower, upper] = cols;
        let boxes_ok = lower.iter().zip(&upper).all(|(l, u)| l <= u);
        let (total, lo_sum, hi_sum): (f64, f64, f64) = (load.iter().sum(), lower.iter().sum(), upper.iter().sum());
        if !boxes_ok || lo_sum > total || total > hi_sum {
            continue;
        }
        let cast = |v: Vec<f64>| v.into_iter().map(lit::<T>).collect::<Vec<T>>();
        let instance = ProblemInstance::new(
            cast(load),
            cast(lower),
            cast(upper),
            CostModel::quadratic(cast(a), cast(b), cast(c)),
        );
        match instance {
            Ok(instance) => {
                return Ok(GeneratedInstance {
                    instance,
                    attempts: attempt,
                })
            }
            // Rounding to a narrower scalar type can break feasibility.
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generator(format!(
        "{MAX_REJECTIONS} consecutive draws were infeasible; widen the capacity or narrow the load ranges"
    )))
}
