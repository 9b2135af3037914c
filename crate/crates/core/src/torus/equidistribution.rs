//! Measured equidistribution of expanded unstable segments.
//!
//! For `h` uniform on `V_r = (-r/8, r/8)`, the point `g_t(x + h u)` equals
//! `M^t x + h λ^t u`. The fraction landing in `O` should approach `μ(O)`
//! like `e^(-λ' t)`; `λ'` is fitted from the observed deviations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::{wrap_point, HyperbolicMap, Point};
use super::region::RectUnion;
use super::segment::fraction_in;
use crate::error::{domain, Result};
use crate::numeric::least_squares;

pub const MIN_SAMPLES: u64 = 10_000;
const CHUNK: u64 = 8_192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionConfig {
    pub base: Point,
    pub target: RectUnion,
    pub r: f64,
    pub t_values: Vec<u32>,
    pub samples: u64,
    pub seed: u64,
    /// Use the exact segment intersection when the image wraps the torus
    /// at most this many times; 0 forces Monte Carlo.
    pub exact_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionPoint {
    pub t: u32,
    pub estimate: f64,
    pub standard_error: f64,
    pub exact: bool,
    /// `|estimate - μ(O)|`.
    pub deviation: f64,
    /// `μ(σ_ρ O) - ρ/ν(V_r)` with `ρ = e^(-λ' t)`, when `λ'` was fitted.
    pub lower_bound: Option<f64>,
    pub lower_bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionReport {
    pub target_measure: f64,
    pub points: Vec<EquidistributionPoint>,
    pub lambda_prime_fit: Option<f64>,
    pub amplitude_fit: Option<f64>,
    /// Residuals of `ln(deviation)` about the fitted line, for the points
    /// used in the fit.
    pub residuals: Vec<f64>,
    /// Set when fewer than two deviations rose above three standard errors
    /// or the fitted rate was not positive.
    pub degenerate: bool,
    /// Every checked lower bound held (within three standard errors).
    pub lower_bound_holds: bool,
}

/// Fraction of `g_t V_r x` in `O`, with its standard error; exact when the
/// image wraps few enough times.
pub fn equidistribution_estimate(
    cfg: &EquidistributionConfig,
    hm: &HyperbolicMap,
    t: u32,
) -> Result<(f64, f64, bool)> {
    if !(cfg.r > 0.0) {
        return domain("r must be positive");
    }
    let orbit_point = *hm
        .orbit(cfg.base, t as usize + 1)
        .last()
        .expect("non-empty orbit");
    let step = hm.unstable_step(t as usize);
    let half = cfg.r / 8.0;
    if cfg.exact_limit > 0 {
        let start = wrap_point([
            orbit_point[0] - half * step[0],
            orbit_point[1] - half * step[1],
        ]);
        let v = [2.0 * half * step[0], 2.0 * half * step[1]];
        if let Some(f) = fraction_in(&cfg.target, start, v, cfg.exact_limit) {
            return Ok((f, 0.0, true));
        }
    }
    if cfg.samples < MIN_SAMPLES {
        return domain(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            cfg.samples
        ));
    }
    let chunks = cfg.samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((t as u64) << 32 | c);
            let size = CHUNK.min(cfg.samples - c * CHUNK);
            (0..size)
                .filter(|_| {
                    let h = (2.0 * rng.random::<f64>() - 1.0) * half;
                    let p =
                        wrap_point([orbit_point[0] + h * step[0], orbit_point[1] + h * step[1]]);
                    cfg.target.contains(p)
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / cfg.samples as f64;
    Ok((p, (p * (1.0 - p) / cfg.samples as f64).sqrt(), false))
}

/// Estimates the hitting fraction at each `t`, fits `|dev| ≈ A e^(-λ' t)`
/// and checks `estimate ≥ μ(σ_ρ O) - ρ/ν(V_r)` at `ρ = e^(-λ' t)` with a
/// three-standard-error allowance.
pub fn equidistribution_decay(
    cfg: &EquidistributionConfig,
    hm: &HyperbolicMap,
) -> Result<EquidistributionReport> {
    if cfg.t_values.is_empty() {
        return domain("no times requested");
    }
    let mu = cfg.target.area();
    let mut points = Vec::with_capacity(cfg.t_values.len());
    for &t in &cfg.t_values {
        let (estimate, se, exact) = equidistribution_estimate(cfg, hm, t)?;
        points.push(EquidistributionPoint {
            t,
            estimate,
            standard_error: se,
            exact,
            deviation: (estimate - mu).abs(),
            lower_bound: None,
            lower_bound_holds: None,
        });
    }
    let used: Vec<&EquidistributionPoint> = points
        .iter()
        .filter(|p| p.deviation > 3.0 * p.standard_error && p.deviation > 1e-12)
        .collect();
    let xs: Vec<f64> = used.iter().map(|p| p.t as f64).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.deviation.ln()).collect();
    let fit = if used.len() >= 2 {
        least_squares(&xs, &ys).ok()
    } else {
        None
    };
    let fit = fit.filter(|f| f.slope < 0.0);
    let mut report = EquidistributionReport {
        target_measure: mu,
        points,
        lambda_prime_fit: None,
        amplitude_fit: None,
        residuals: Vec::new(),
        degenerate: fit.is_none(),
        lower_bound_holds: true,
    };
    if let Some(f) = fit {
        let lp = -f.slope;
        report.lambda_prime_fit = Some(lp);
        report.amplitude_fit = Some(f.intercept.exp());
        report.residuals = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| y - (f.intercept + f.slope * x))
            .collect();
        let tile = cfg.r / 4.0;
        for p in &mut report.points {
            let rho = (-lp * p.t as f64).exp();
            let bound = cfg.target.core_measure(rho) - rho / tile;
            let holds = p.estimate >= bound - 3.0 * p.standard_error - 1e-12;
            p.lower_bound = Some(bound);
            p.lower_bound_holds = Some(holds);
            report.lower_bound_holds &= holds;
        }
    }
    Ok(report)
}
