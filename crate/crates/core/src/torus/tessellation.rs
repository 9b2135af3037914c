//! Tiles of the unstable line and their contractions.
//!
//! The expanding subgroup here is the unstable line `{h·u}` with `exp` the
//! identity, so `V_r` is the open interval of length `r/4` centred at 0 and
//! its translates by `(r/4)·ℤ` tile the line. Conjugating by `g_t` contracts
//! a tile by `λ_u^-t`.

use serde::{Deserialize, Serialize};

use super::map::{wrap_point, HyperbolicMap, Point};
use crate::error::{domain, Result};

/// A translate of `V_r` through `base`: the points `base + h·u` with
/// `|h - center| < half_length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnstableSegment {
    pub base: Point,
    pub direction: [f64; 2],
    /// Tile index `k`; the tile is centred at `k·(r/4)`.
    pub index: i64,
    pub center: f64,
    pub half_length: f64,
}

impl UnstableSegment {
    pub fn point_at(&self, h: f64) -> Point {
        wrap_point([
            self.base[0] + h * self.direction[0],
            self.base[1] + h * self.direction[1],
        ])
    }

    /// Closed tile in units of half a tile length: `[2k - 1, 2k + 1]`.
    pub fn half_units(&self) -> (i64, i64) {
        (2 * self.index - 1, 2 * self.index + 1)
    }
}

fn check_radius(r: f64, r2: f64) -> Result<()> {
    if !(r > 0.0 && r <= r2) {
        return domain(format!("r = {r} must lie in (0, r2 = {r2}]"));
    }
    Ok(())
}

/// `V_r` and its translates whose closures meet `[-window, window]`.
pub fn tessellate(
    base: Point,
    r: f64,
    hm: &HyperbolicMap,
    window: f64,
) -> Result<Vec<UnstableSegment>> {
    check_radius(r, hm.constants(hm.ln_lambda()).r2())?;
    if !(window >= 0.0) {
        return domain("window must be non-negative");
    }
    let w = r / 4.0;
    let k_max = (window / w + 0.5).ceil() as i64;
    Ok((-k_max..=k_max)
        .map(|k| UnstableSegment {
            base: wrap_point(base),
            direction: hm.u_dir,
            index: k,
            center: k as f64 * w,
            half_length: w / 2.0,
        })
        .collect())
}

/// Exact tiling checks on the half-unit endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingCheck {
    /// Open tiles pairwise disjoint.
    pub disjoint: bool,
    /// Closed tiles cover the span from the first to the last tile.
    pub covering: bool,
}

pub fn check_tiling(tiles: &[UnstableSegment]) -> TilingCheck {
    let mut spans: Vec<(i64, i64)> = tiles.iter().map(UnstableSegment::half_units).collect();
    spans.sort_unstable();
    let disjoint = spans.windows(2).all(|p| p[0].1 <= p[1].0);
    let covering = spans.windows(2).all(|p| p[1].0 <= p[0].1);
    TilingCheck { disjoint, covering }
}

/// `B(r/16) ⊂ V_r ⊂ B(r/4)` on the unstable line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowenInclusion {
    pub inner_radius: f64,
    pub half_length: f64,
    pub outer_radius: f64,
    pub holds: bool,
    /// `ν(V_r)`, equal to `r/4` with `c1 = c2 = 1`.
    pub tile_measure: f64,
}

pub fn bowen_inclusion(r: f64) -> Result<BowenInclusion> {
    if !(r > 0.0) {
        return domain("r must be positive");
    }
    let inner = r / 16.0;
    let half = r / 8.0;
    let outer = r / 4.0;
    Ok(BowenInclusion {
        inner_radius: inner,
        half_length: half,
        outer_radius: outer,
        holds: inner <= half && half <= outer,
        tile_measure: 2.0 * half,
    })
}

/// Tile count of the overlap lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapCount {
    pub t: u32,
    /// Number of translates whose contracted closure meets `V_r`.
    pub exact: u64,
    /// `e^(ηt)(1 + c0 e^(-λ_min t))` with `c0 = 2`.
    pub bound: f64,
    /// `max(0, exact - e^(ηt))`: the least `c0` that works at this `t`.
    pub c0_fit: f64,
    /// Whether `t > ln 8 / λ_min`, the lemma's stated range.
    pub in_lemma_range: bool,
    /// Whether the tiles just inside and just outside the count were
    /// confirmed to meet and to miss `V_r`.
    pub boundary_verified: bool,
}

/// Counts `k ∈ ℤ` with `λ^-t·[(k - ½)w, (k + ½)w] ∩ (-w/2, w/2) ≠ ∅`, i.e.
/// `|k| < (λ^t + 1)/2`. The count does not depend on `r`.
pub fn lemma_covering_count(t: u32, r: f64, hm: &HyperbolicMap) -> Result<OverlapCount> {
    check_radius(r, hm.constants(hm.ln_lambda()).r2())?;
    if t == 0 {
        return domain("t must be at least 1");
    }
    let lam_t = hm.lambda_u.powi(t as i32);
    let w = r / 4.0;
    let meets = |k: i64| {
        let c = w / lam_t;
        let (lo, hi) = ((k as f64 - 0.5) * c, (k as f64 + 0.5) * c);
        lo < w / 2.0 && hi > -w / 2.0
    };
    let a = (lam_t + 1.0) / 2.0;
    let k_edge = a.ceil() as i64 - 1;
    let exact = (2 * k_edge + 1) as u64;
    let boundary_verified =
        meets(k_edge) && meets(-k_edge) && !meets(k_edge + 1) && !meets(-k_edge - 1);
    let c0 = 2.0;
    Ok(OverlapCount {
        t,
        exact,
        bound: lam_t * (1.0 + c0 / lam_t),
        c0_fit: (exact as f64 - lam_t).max(0.0),
        in_lemma_range: t as f64 > 8f64.ln() / hm.ln_lambda(),
        boundary_verified,
    })
}

/// Ball cover of a Bowen segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub segment_length: f64,
    pub ball_radius: f64,
    pub balls_needed: u64,
    /// `C1·λ^(L t)/e^(η t)`, equal to `C1 = 1` here.
    pub allowed: f64,
    pub holds: bool,
    /// `λ_max·L - η`, zero for a linear map of the 2-torus.
    pub exponent_gap: f64,
}

pub fn coveringballs_check(t: u32, r: f64, hm: &HyperbolicMap) -> Result<BallCover> {
    if t == 0 || !(r > 0.0) {
        return domain("need t >= 1 and r > 0");
    }
    let contraction = hm.lambda_u.powi(-(t as i32));
    let segment_length = r / 4.0 * contraction;
    let ball_radius = r * contraction;
    let balls_needed = (segment_length / (2.0 * ball_radius)).ceil() as u64;
    let k = hm.constants(hm.ln_lambda());
    let exponent_gap = k.lambda_max * k.dim_p as f64 - k.eta;
    let allowed = k.ball_cover * (exponent_gap * t as f64).exp();
    Ok(BallCover {
        segment_length,
        ball_radius,
        balls_needed,
        allowed,
        holds: balls_needed as f64 <= allowed,
        exponent_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiles_of_length_r_over_4() {
        let hm = HyperbolicMap::cat();
        let tiles = tessellate([0.3, 0.4], 0.2, &hm, 1.0).unwrap();
        assert!(tiles
            .iter()
            .all(|s| (2.0 * s.half_length - 0.05).abs() < 1e-15));
        let c = check_tiling(&tiles);
        assert!(c.disjoint && c.covering);
        let first = tiles.first().unwrap();
        assert!(first.center - first.half_length <= -1.0);
        assert!(tessellate([0.0, 0.0], 0.3, &hm, 1.0).is_err());
    }

    #[test]
    fn gaps_and_overlaps_are_detected() {
        let hm = HyperbolicMap::cat();
        let mut tiles = tessellate([0.0, 0.0], 0.2, &hm, 0.2).unwrap();
        tiles.remove(3);
        assert!(!check_tiling(&tiles).covering);
        let mut tiles = tessellate([0.0, 0.0], 0.2, &hm, 0.2).unwrap();
        let dup = tiles[2];
        tiles.push(dup);
        assert!(!check_tiling(&tiles).disjoint);
    }

    #[test]
    fn bowen_inclusion_example() {
        let b = bowen_inclusion(0.2).unwrap();
        assert!((b.inner_radius - 0.0125).abs() < 1e-15);
        assert!((2.0 * b.half_length - 0.05).abs() < 1e-15);
        assert!((b.outer_radius - 0.05).abs() < 1e-15);
        assert!(b.holds);
        assert!((b.tile_measure - 0.05).abs() < 1e-15);
    }

    #[test]
    fn overlap_count_at_t2() {
        let hm = HyperbolicMap::cat();
        let c = lemma_covering_count(2, 0.2, &hm).unwrap();
        assert_eq!(c.exact, 7);
        assert!(c.exact <= 8);
        assert!((c.bound - 8.854101966249685).abs() < 1e-12);
        assert!(c.boundary_verified && !c.in_lemma_range);
        assert!(lemma_covering_count(3, 0.2, &hm).unwrap().in_lemma_range);
    }

    #[test]
    fn overlap_count_sweep() {
        let hm = HyperbolicMap::cat();
        for &r in &[0.05, 0.1, 0.2] {
            for t in 2..=20 {
                let c = lemma_covering_count(t, r, &hm).unwrap();
                assert!(c.boundary_verified);
                assert!((c.exact as f64) <= c.bound);
                assert!(c.c0_fit <= 2.0);
            }
        }
        let c = lemma_covering_count(20, 0.1, &hm).unwrap();
        let ratio = c.exact as f64 / hm.lambda_u.powi(20);
        assert!((ratio - 1.0).abs() < 1e-7);
    }

    #[test]
    fn one_ball_suffices() {
        let hm = HyperbolicMap::cat();
        for t in 1..10 {
            for r in [0.01, 0.1, 0.25] {
                let b = coveringballs_check(t, r, &hm).unwrap();
                assert_eq!(b.balls_needed, 1);
                assert!(b.holds && b.exponent_gap == 0.0);
                assert!(b.segment_length < 2.0 * b.ball_radius);
            }
        }
    }
}
