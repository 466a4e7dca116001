//! Floating-point abstraction shared by every numerical routine in the crate.
//!
//! All math is written against [`Scalar`], which is implemented for `f32` and
//! `f64`. The simulator and CLI run in `f64`; `f32` is supported for
//! experimentation but the invariant budgets in [`crate::metrics::budgets`]
//! are calibrated for `f64`.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

/// Neumaier-compensated sum of a slice.
pub fn sum<T: Scalar>(xs: &[T]) -> T {
    let mut acc = Compensated::zero();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Euclidean distance between two equally sized vectors.
pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

pub fn all_finite<T: Scalar>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// Error-free transformation: `a + b = s + e` exactly.
#[inline]
fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// A running value carried as an unevaluated pair `hi + lo`.
///
/// Running sums grow linearly with the iteration count while the quantities
/// derived from them (differences of consecutive sums) stay O(1). Carrying
/// the rounding error in `lo` keeps those differences accurate to a few ulps
/// of the difference rather than of the sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated<T> {
    hi: T,
    lo: T,
}

impl<T: Scalar> Compensated<T> {
    pub fn zero() -> Self {
        Self {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo = self.lo + e;
    }

    /// `self - other`, rounded once.
    pub fn diff(&self, other: &Self) -> T {
        let (s, e) = two_sum(self.hi, -other.hi);
        s + (e + (self.lo - other.lo))
    }

    pub fn value(&self) -> T {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(&xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn compensated_difference_is_accurate_after_growth() {
        let mut a = Compensated::<f64>::zero();
        let mut b = Compensated::<f64>::zero();
        for _ in 0..100_000 {
            a.add(0.1);
            b.add(0.1);
        }
        a.add(1e-9);
        assert!((a.diff(&b) - 1e-9).abs() < 1e-22);
    }

    #[test]
    fn distances() {
        assert_eq!(dist2(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(norm2(&[3.0f32, 4.0]), 5.0);
        assert_eq!(max_abs_diff(&[1.0, 2.0], &[1.5, 0.0]), 2.0);
    }
}
