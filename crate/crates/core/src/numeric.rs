//! Small numerical kernels shared by the bound evaluators and the models:
//! entropy-style terms with their endpoint conventions, bracketing root
//! search, and ordinary least squares.

use crate::error::{Error, Result};

/// `x * ln(1/x)`, with the value `0` at `x = 0` taken by branch.
pub fn xlog_inv(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Ceiling that snaps values within `1e-9` of an integer onto that integer.
///
/// Quantities such as `(1 - (1-δ)/(1-ε))·N` are exact integers in real
/// arithmetic far more often than in floating point.
pub fn snapped_ceil(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    }
}

/// Brackets `[a, b]` of consecutive sample points where `f` changes sign
/// (strictly positive on one side, non-positive on the other).
pub fn sign_change_brackets(f: impl Fn(f64) -> f64, samples: &[f64]) -> Vec<(f64, f64)> {
    let values: Vec<f64> = samples.iter().map(|&x| f(x)).collect();
    samples
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| (v[0] > 0.0) != (v[1] > 0.0))
        .map(|(x, _)| (x[0], x[1]))
        .collect()
}

/// Bisection on a bracket whose endpoints have different signs of `f`.
///
/// Returns the final bracket `(lo, hi)` with `hi - lo <= tol`; `lo` keeps the
/// sign `f(a)` had, `hi` the sign of `f(b)`.
pub fn bisect(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let positive_at_a = f(a) > 0.0;
    let (mut lo, mut hi) = (a, b);
    // 200 halvings exhaust f64 resolution on any finite bracket.
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == positive_at_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Result of an ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least two paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx <= f64::EPSILON * n * mean_x.abs().max(1.0) {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xlog_inv_endpoints() {
        assert_eq!(xlog_inv(0.0), 0.0);
        assert_eq!(xlog_inv(1.0), 0.0);
        assert!((xlog_inv(0.5) - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn snapped_ceil_absorbs_rounding_noise() {
        assert_eq!(snapped_ceil(0.6 * 10.0), 6.0);
        assert_eq!(snapped_ceil(6.000000000000001), 6.0);
        assert_eq!(snapped_ceil(5.2), 6.0);
        assert_eq!(snapped_ceil(-0.0), 0.0);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let (lo, hi) = bisect(|x| 2.0 - x * x, 0.0, 2.0, 1e-12);
        assert!(hi - lo <= 1e-12);
        assert!((lo - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn brackets_report_every_crossing() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let b = sign_change_brackets(|x| (x - 0.255) * (x - 0.705), &xs);
        assert_eq!(b.len(), 2);
        assert!(b[0].0 < 0.255 && 0.255 < b[0].1);
    }

    #[test]
    fn least_squares_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let fit = least_squares(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!(least_squares(&[1.0, 1.0], &[0.0, 2.0]).is_err());
    }
}
