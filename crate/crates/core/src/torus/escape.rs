//! Finite-horizon escape sets on an unstable segment and their box counts.
//!
//! For horizon `n = kT`, `V_r = (-r/8, r/8)` is cut into `M = ⌈λ_u^n⌉`
//! Bowen boxes of length `(r/4)/M`, each split into `grid_per_box`
//! sub-segments. A sub-segment belongs to the escape set when the orbit of
//! its (jittered) centre spends at least `⌈δn⌉` of the times `0..n` outside
//! `O`; a box is counted when it holds such a centre. The covering exponent
//! is `ln(count)/ln(M)`, which is `1` for the whole segment.
//!
//! Centres are classified by branch and bound: an index range whose image at
//! time `t` lies entirely inside or entirely outside `O` is scored in one
//! step, and only mixed ranges are split.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::{wrap_point, HyperbolicMap, Point};
use super::region::RectUnion;
use super::segment::fraction_in;
use crate::bound::{codim_lower, SystemConstants};
use crate::error::{domain, Error, Result};
use crate::numeric::snapped_ceil;

/// Largest admissible `N·T·ln λ_u`.
pub const SCALE_BUDGET: f64 = 25.0;
pub const MIN_GRID_PER_BOX: u32 = 4;
/// Slack on the exponent comparison.
pub const EXPONENT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeSampling {
    pub base: Point,
    pub target: RectUnion,
    pub r: f64,
    pub delta: f64,
    pub n: u32,
    pub t: u32,
    pub grid_per_box: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDimReport {
    /// Bowen box length at each level `k = 1..=N`.
    pub scales: Vec<f64>,
    /// Boxes meeting the escape set at each level.
    pub counts: Vec<u64>,
    /// Total boxes `M` at each level.
    pub boxes: Vec<u64>,
    /// `ln(count)/ln(M)` per level; `None` for an empty escape set.
    pub exponents: Vec<Option<f64>>,
    /// Exponent at the finest level.
    pub exponent: Option<f64>,
    /// `μ(σ_5r O)`, exact.
    pub y5r: f64,
    pub delta_threshold: f64,
    pub theoretical_codim: f64,
    pub codim_signed: f64,
    pub lambda_prime: f64,
    pub tolerance: f64,
    /// `exponent ≤ L - theoretical_codim + tolerance` (vacuous when empty).
    pub consistent: bool,
    pub empirical: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Class {
    In,
    Out,
    Mixed,
}

struct Level<'a> {
    target: &'a RectUnion,
    orbit: &'a [Point],
    steps: &'a [[f64; 2]],
    horizon: usize,
    allowed_misses: usize,
    h0: f64,
    sub_len: f64,
    offset: f64,
    grid: u64,
}

impl Level<'_> {
    fn classify(&self, i0: u64, i1: u64, t: usize) -> Class {
        let b = self.orbit[t];
        let s = self.steps[t];
        let ha = self.h0 + i0 as f64 * self.sub_len;
        let len = (i1 - i0) as f64 * self.sub_len;
        let start = wrap_point([b[0] + ha * s[0], b[1] + ha * s[1]]);
        match fraction_in(self.target, start, [len * s[0], len * s[1]], 64) {
            Some(f) if f >= 1.0 - 1e-12 => Class::In,
            Some(f) if f <= 1e-12 => Class::Out,
            _ => Class::Mixed,
        }
    }

    fn centre_passes(&self, i: u64, from: usize, mut misses: usize) -> bool {
        let h = self.h0 + (i as f64 + self.offset) * self.sub_len;
        for t in from..self.horizon {
            let b = self.orbit[t];
            let s = self.steps[t];
            if self
                .target
                .contains(wrap_point([b[0] + h * s[0], b[1] + h * s[1]]))
            {
                misses += 1;
                if misses > self.allowed_misses {
                    return false;
                }
            }
        }
        true
    }

    /// Pushes box-index ranges `[lo, hi]` that contain passing centres.
    fn visit(&self, i0: u64, i1: u64, mut t: usize, mut misses: usize, out: &mut Vec<(u64, u64)>) {
        while t < self.horizon {
            match self.classify(i0, i1, t) {
                Class::In => {
                    misses += 1;
                    if misses > self.allowed_misses {
                        return;
                    }
                }
                Class::Out => {}
                Class::Mixed if i1 - i0 == 1 => {
                    if self.centre_passes(i0, t, misses) {
                        out.push((i0 / self.grid, i0 / self.grid));
                    }
                    return;
                }
                Class::Mixed => {
                    let mid = i0 + (i1 - i0) / 2;
                    self.visit(i0, mid, t, misses, out);
                    self.visit(mid, i1, t, misses, out);
                    return;
                }
            }
            t += 1;
        }
        out.push((i0 / self.grid, (i1 - 1) / self.grid));
    }
}

fn union_size(mut ranges: Vec<(u64, u64)>) -> u64 {
    ranges.sort_unstable();
    let mut count = 0;
    let mut next_free = 0u64;
    for (lo, hi) in ranges {
        let lo = lo.max(next_free);
        if hi >= lo {
            count += hi - lo + 1;
            next_free = hi + 1;
        }
    }
    count
}

/// Number of boxes at horizon `horizon` that meet the escape set.
fn count_level(
    cfg: &EscapeSampling,
    hm: &HyperbolicMap,
    horizon: usize,
    offset: f64,
) -> (u64, u64, f64) {
    let m = hm.lambda_u.powi(horizon as i32).ceil() as u64;
    let grid = cfg.grid_per_box as u64;
    let total = m * grid;
    let box_len = cfg.r / 4.0 / m as f64;
    let orbit = hm.orbit(cfg.base, horizon);
    let steps: Vec<[f64; 2]> = (0..horizon).map(|t| hm.unstable_step(t)).collect();
    let need = snapped_ceil(cfg.delta * horizon as f64) as usize;
    let level = Level {
        target: &cfg.target,
        orbit: &orbit,
        steps: &steps,
        horizon,
        allowed_misses: horizon - need.min(horizon),
        h0: -cfg.r / 8.0,
        sub_len: box_len / grid as f64,
        offset,
        grid,
    };
    let chunks = total.min(256);
    let ranges: Vec<(u64, u64)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let i0 = total * c / chunks;
            let i1 = total * (c + 1) / chunks;
            let mut out = Vec::new();
            if i1 > i0 {
                level.visit(i0, i1, 0, 0, &mut out);
            }
            out
        })
        .collect();
    (union_size(ranges), m, box_len)
}

/// Samples the finite-horizon escape set at levels `k = 1..=N` and compares
/// the finest covering exponent with the certified codimension.
pub fn sample_escape_set(
    cfg: &EscapeSampling,
    hm: &HyperbolicMap,
    constants: &SystemConstants,
) -> Result<EmpiricalDimReport> {
    if cfg.n == 0 || cfg.t == 0 {
        return domain("N and T must be positive");
    }
    let horizon = (cfg.n * cfg.t) as usize;
    let scale = horizon as f64 * hm.ln_lambda();
    if scale > SCALE_BUDGET {
        return Err(Error::Budget(format!(
            "N·T·ln λ_u = {scale:.3} exceeds the scale budget {SCALE_BUDGET}"
        )));
    }
    if cfg.grid_per_box < MIN_GRID_PER_BOX {
        return domain(format!("grid_per_box must be at least {MIN_GRID_PER_BOX}"));
    }
    if !(cfg.delta > 0.0 && cfg.delta <= 1.0) {
        return domain(format!("delta = {} must lie in (0, 1]", cfg.delta));
    }
    let y5r = cfg.target.core_measure(5.0 * cfg.r);
    let (theoretical_codim, codim_signed, threshold) = if y5r > 0.0 {
        let rep = codim_lower(cfg.r, y5r, cfg.delta, constants)?;
        (rep.codim_lower, rep.codim_signed, rep.threshold.delta_o)
    } else {
        if !(cfg.r > 0.0 && cfg.r <= constants.r2() / 5.0) {
            return domain(format!("r = {} must lie in (0, r2/5]", cfg.r));
        }
        (0.0, 0.0, 1.0)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let offset = 0.01 + 0.98 * rng.random::<f64>();
    let mut report = EmpiricalDimReport {
        scales: Vec::new(),
        counts: Vec::new(),
        boxes: Vec::new(),
        exponents: Vec::new(),
        exponent: None,
        y5r,
        delta_threshold: threshold,
        theoretical_codim,
        codim_signed,
        lambda_prime: constants.lambda_prime,
        tolerance: EXPONENT_TOLERANCE,
        consistent: true,
        empirical: true,
    };
    for k in 1..=cfg.n {
        let (count, m, len) = count_level(cfg, hm, (k * cfg.t) as usize, offset);
        let exponent = (count > 0).then(|| (count as f64).ln() / (m as f64).ln());
        report.scales.push(len);
        report.counts.push(count);
        report.boxes.push(m);
        report.exponents.push(exponent);
        report.exponent = exponent;
    }
    let l = constants.dim_p as f64;
    report.consistent = report
        .exponent
        .is_none_or(|e| e <= l - theoretical_codim + EXPONENT_TOLERANCE);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampling(target: RectUnion, delta: f64, n: u32, t: u32) -> EscapeSampling {
        EscapeSampling {
            base: [0.0, 0.0],
            target,
            r: 0.02,
            delta,
            n,
            t,
            grid_per_box: 4,
            seed: 7,
        }
    }

    fn brute_count(cfg: &EscapeSampling, hm: &HyperbolicMap, horizon: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let offset = 0.01 + 0.98 * rng.random::<f64>();
        let m = hm.lambda_u.powi(horizon as i32).ceil() as u64;
        let g = cfg.grid_per_box as u64;
        let sub = cfg.r / 4.0 / m as f64 / g as f64;
        let need = snapped_ceil(cfg.delta * horizon as f64) as usize;
        let orbit = hm.orbit(cfg.base, horizon);
        let mut boxes = std::collections::BTreeSet::new();
        for i in 0..m * g {
            let h = -cfg.r / 8.0 + (i as f64 + offset) * sub;
            let outside = (0..horizon)
                .filter(|&t| {
                    let s = hm.unstable_step(t);
                    let b = orbit[t];
                    !cfg.target
                        .contains(wrap_point([b[0] + h * s[0], b[1] + h * s[1]]))
                })
                .count();
            if outside >= need {
                boxes.insert(i / g);
            }
        }
        boxes.len() as u64
    }

    #[test]
    fn branch_and_bound_matches_brute_force() {
        let hm = HyperbolicMap::cat();
        let o = RectUnion::complement_of_square([0.0, 0.0], 0.1).unwrap();
        for delta in [0.3, 0.6, 0.9, 1.0] {
            for horizon in [4, 6, 8] {
                let cfg = sampling(o.clone(), delta, 1, horizon);
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let offset = 0.01 + 0.98 * rng.random::<f64>();
                let (fast, _, _) = count_level(&cfg, &hm, horizon as usize, offset);
                assert_eq!(
                    fast,
                    brute_count(&cfg, &hm, horizon as usize),
                    "delta={delta} n={horizon}"
                );
            }
        }
    }

    #[test]
    fn empty_target_fills_the_segment() {
        let hm = HyperbolicMap::cat();
        let rep = sample_escape_set(
            &sampling(RectUnion::empty(), 1.0, 2, 4),
            &hm,
            &hm.constants(hm.ln_lambda()),
        )
        .unwrap();
        assert_eq!(rep.counts, rep.boxes);
        assert_eq!(rep.exponent, Some(1.0));
    }

    #[test]
    fn small_delta_fills_the_segment() {
        let hm = HyperbolicMap::cat();
        let o = RectUnion::complement_of_square([0.0, 0.0], 0.1).unwrap();
        let rep = sample_escape_set(
            &sampling(o, 0.005, 2, 3),
            &hm,
            &hm.constants(hm.ln_lambda()),
        )
        .unwrap();
        assert!((rep.exponent.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_target_gives_a_visible_drop() {
        let hm = HyperbolicMap::cat();
        let o = RectUnion::complement_of_square([0.0, 0.0], 0.1).unwrap();
        let rep =
            sample_escape_set(&sampling(o, 1.0, 3, 4), &hm, &hm.constants(hm.ln_lambda())).unwrap();
        assert!((rep.y5r - 0.91).abs() < 1e-12);
        assert!(rep.exponent.unwrap() < 0.9);
        assert!(rep.consistent);
    }

    #[test]
    fn counts_fall_with_delta() {
        let hm = HyperbolicMap::cat();
        let o = RectUnion::complement_of_square([0.0, 0.0], 0.3).unwrap();
        let k = hm.constants(hm.ln_lambda());
        let mut prev = u64::MAX;
        for delta in [0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
            let rep = sample_escape_set(&sampling(o.clone(), delta, 2, 4), &hm, &k).unwrap();
            let c = *rep.counts.last().unwrap();
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn guards() {
        let hm = HyperbolicMap::cat();
        let k = hm.constants(hm.ln_lambda());
        let o = RectUnion::complement_of_square([0.0, 0.0], 0.1).unwrap();
        assert!(matches!(
            sample_escape_set(&sampling(o.clone(), 0.99, 10, 10), &hm, &k),
            Err(Error::Budget(_))
        ));
        let mut c = sampling(o.clone(), 0.99, 2, 2);
        c.grid_per_box = 3;
        assert!(sample_escape_set(&c, &hm, &k).is_err());
        let mut c = sampling(o, 0.99, 2, 2);
        c.r = 0.2;
        assert!(sample_escape_set(&c, &hm, &k).is_err());
    }
}
