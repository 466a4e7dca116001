use super::budgets::RATE_FLOOR_EPS;
use super::trace::{RunTrace, StepRecord};
use crate::error::{Error, Result};
use crate::oracle::DispatchSolution;
use crate::scalar::{dist2, from_usize, lit, sum, Scalar};

/// Least-squares fit of `ln e[k] ~ c + k ln a` over an inclusive window.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate<T> {
    pub rate: T,
    pub k0: usize,
    pub k1: usize,
    pub r_squared: T,
    /// Log-domain residuals of the fit, one per step in the window.
    pub residuals: Vec<T>,
}

impl<T: Scalar> RateEstimate<T> {
    pub fn is_contracting(&self) -> bool {
        self.rate < T::one()
    }
}

pub fn fit_rate<T: Scalar>(series: &[T], window: (usize, usize)) -> Result<RateEstimate<T>> {
    let (k0, k1) = window;
    if k1 >= series.len() || k0 >= k1 {
        return Err(Error::FitWindow {
            k0,
            k1,
            suggested_k0: 0,
        });
    }
    if let Some(bad) = (k0..=k1)
        .rev()
        .find(|&k| !(series[k] > T::zero()) || !series[k].is_finite())
    {
        return Err(Error::FitWindow {
            k0,
            k1,
            suggested_k0: bad + 1,
        });
    }
    let xs: Vec<T> = (k0..=k1).map(from_usize).collect();
    let ys: Vec<T> = series[k0..=k1].iter().map(|v| v.ln()).collect();
    let count = from_usize::<T>(xs.len());
    let (mx, my) = (sum(&xs) / count, sum(&ys) / count);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
        syy = syy + (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let residuals: Vec<T> = xs.iter().zip(&ys).map(|(&x, &y)| y - (my + slope * (x - mx))).collect();
    let ss_res = residuals.iter().fold(T::zero(), |acc, &r| acc + r * r);
    let r_squared = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    Ok(RateEstimate {
        rate: slope.exp(),
        k0,
        k1,
        r_squared,
        residuals,
    })
}

/// Tail window for [`fit_rate`]: the series is cut before the first value
/// at or below `100 eps * max(e[0], 1)` (round-off floor), and the last half
/// of what remains is used. `None` when fewer than three usable steps exist.
pub fn default_window<T: Scalar>(series: &[T]) -> Option<(usize, usize)> {
    let first = *series.first()?;
    let floor = lit::<T>(RATE_FLOOR_EPS) * T::epsilon() * first.max(T::one());
    let end = series
        .iter()
        .position(|&v| !(v > floor) || !v.is_finite())
        .unwrap_or(series.len());
    if end < 3 {
        return None;
    }
    let last = end - 1;
    Some((last.div_ceil(2), last))
}

/// `max_{0 <= k <= K} a^{-k} e[k]`.
pub fn weighted_norm<T: Scalar>(series: &[T], a: T, horizon: usize) -> Result<T> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::Config(format!("weighting base a = {a} must lie in (0, 1)")));
    }
    if horizon >= series.len() {
        return Err(Error::DimensionMismatch {
            what: "weighted norm horizon",
            expected: series.len(),
            actual: horizon + 1,
        });
    }
    let log_a = a.ln();
    Ok(series[..=horizon]
        .iter()
        .enumerate()
        .fold(T::zero(), |m, (k, &v)| m.max(v * (-from_usize::<T>(k) * log_a).exp())))
}

/// `||p[k] - p*||_2` for every record.
pub fn convergence_error<T: Scalar>(trace: &RunTrace<T>, solution: &DispatchSolution<T>) -> Result<Vec<T>> {
    trace
        .records
        .iter()
        .map(|r| {
            if r.p.len() != solution.n() {
                return Err(Error::DimensionMismatch {
                    what: "trace power vector",
                    expected: solution.n(),
                    actual: r.p.len(),
                });
            }
            Ok(dist2(&r.p, &solution.p_star))
        })
        .collect()
}

/// Deviation of the local estimates from the average multiplier,
/// `x - (1^T lambda / n) 1`, with the sum taken over every node that holds
/// multiplier mass (virtual nodes included).
pub fn consensus_deviation<T: Scalar>(record: &StepRecord<T>) -> Vec<T> {
    let est = record.consensus();
    let mean = sum(&record.lambda) / from_usize(est.len());
    est.iter().map(|&x| x - mean).collect()
}

/// Distance of the primal iterate and of the averaged estimate from the
/// optimum: `(||p - p*||_2, |mean(x) - x*|)`.
pub fn tracking_gap<T: Scalar>(record: &StepRecord<T>, solution: &DispatchSolution<T>) -> (T, T) {
    let est = record.consensus();
    let mean = sum(est) / from_usize(est.len());
    (
        dist2(&record.p, &solution.p_star),
        (mean - solution.consensus_multiplier()).abs(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_series() {
        let s: Vec<f64> = (0..60).map(|k| 0.5f64.powi(k)).collect();
        let fit = fit_rate(&s, (0, 59)).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let s: Vec<f64> = (0..200).map(|k| 3.0 * 0.97f64.powi(k)).collect();
        assert!((fit_rate(&s, (10, 199)).unwrap().rate - 0.97).abs() < 1e-12);
    }

    #[test]
    fn noisy_series_fit_is_close() {
        let clean: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        let noisy: Vec<f64> = clean
            .iter()
            .enumerate()
            .map(|(k, v)| v + if k % 2 == 0 { 1e-12 } else { -1e-12 })
            .collect();
        let a = fit_rate(&clean, (0, 29)).unwrap().rate;
        let b = fit_rate(&noisy, (0, 29)).unwrap().rate;
        assert!((a - b).abs() < 1e-3);
    }

    #[test]
    fn diverging_series_is_flagged() {
        let s: Vec<f64> = (0..20).map(|k| 1.1f64.powi(k)).collect();
        let fit = fit_rate(&s, (0, 19)).unwrap();
        assert!(fit.rate > 1.0 && !fit.is_contracting());
    }

    #[test]
    fn nonpositive_values_suggest_later_start() {
        let s = [1.0, 0.5, 0.0, 0.1, 0.05, 0.02];
        match fit_rate(&s, (0, 5)) {
            Err(Error::FitWindow { suggested_k0, .. }) => assert_eq!(suggested_k0, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(fit_rate(&s, (3, 5)).is_ok());
        assert!(fit_rate(&s, (4, 4)).is_err());
        assert!(fit_rate(&s, (0, 9)).is_err());
    }

    #[test]
    fn default_window_stops_at_floor() {
        let mut s: Vec<f64> = (0..40).map(|k| 0.5f64.powi(k)).collect();
        s.extend(std::iter::repeat_n(1e-16, 100));
        let (k0, k1) = default_window(&s).unwrap();
        assert!(s[k1] > 100.0 * f64::EPSILON);
        assert_eq!(k0, k1.div_ceil(2));
        assert!(default_window(&[1.0, 0.0]).is_none());
    }

    #[test]
    fn weighted_norm_examples() {
        assert_eq!(weighted_norm(&[2.0, 2.0, 2.0], 0.5, 2).unwrap(), 8.0);
        let s: Vec<f64> = (0..30).map(|k| 3.0 * 0.8f64.powi(k)).collect();
        for horizon in 0..30 {
            assert!((weighted_norm(&s, 0.8, horizon).unwrap() - 3.0).abs() < 1e-12);
        }
        assert!(weighted_norm(&s, 1.0, 3).is_err());
        assert!(weighted_norm(&s, 0.5, 30).is_err());
    }

    proptest::proptest! {
        #[test]
        fn weighted_norm_monotonicity(
            series in proptest::collection::vec(1e-3f64..10.0, 2..40),
            a in 0.05f64..0.95,
            da in 0.0f64..0.04,
        ) {
            let last = series.len() - 1;
            let mut prev = 0.0;
            for horizon in 0..=last {
                let w = weighted_norm(&series, a, horizon).unwrap();
                proptest::prop_assert!(w >= prev);
                prev = w;
            }
            let wider = weighted_norm(&series, a + da, last).unwrap();
            proptest::prop_assert!(wider <= prev * (1.0 + 1e-12));
        }
    }
}
