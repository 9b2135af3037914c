//! Exact intersection of a straight segment on the torus with a union of
//! rectangles.

use super::map::Point;
use super::region::{Rect, RectUnion};

/// Parameter intervals `s ∈ [0, 1]` where `c + s·v` (mod 1) lies in the
/// open arc `(a, b)`, for one coordinate.
fn side_intervals(c: f64, v: f64, a: f64, b: f64, limit: usize) -> Option<Vec<(f64, f64)>> {
    if b - a >= 1.0 {
        return Some(vec![(0.0, 1.0)]);
    }
    if v == 0.0 {
        let d = (c - a) - (c - a).floor();
        return Some(if d > 0.0 && d < b - a {
            vec![(0.0, 1.0)]
        } else {
            vec![]
        });
    }
    let (lo, hi) = if v > 0.0 { (c, c + v) } else { (c + v, c) };
    // Integers m with (a + m, b + m) meeting [lo, hi].
    let m0 = (lo - b).floor() as i64;
    let m1 = (hi - a).ceil() as i64;
    if (m1 - m0) as usize > limit {
        return None;
    }
    let mut out = Vec::new();
    for m in m0..=m1 {
        let (p, q) = ((a + m as f64 - c) / v, (b + m as f64 - c) / v);
        let (s0, s1) = if p < q { (p, q) } else { (q, p) };
        let (s0, s1) = (s0.max(0.0), s1.min(1.0));
        if s0 < s1 {
            out.push((s0, s1));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Some(out)
}

fn intersect(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < xs.len() && j < ys.len() {
        let lo = xs[i].0.max(ys[j].0);
        let hi = xs[i].1.min(ys[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if xs[i].1 < ys[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn rect_intervals(r: &Rect, c: Point, v: [f64; 2], limit: usize) -> Option<Vec<(f64, f64)>> {
    let xs = side_intervals(c[0], v[0], r.x0, r.x1, limit)?;
    let ys = side_intervals(c[1], v[1], r.y0, r.y1, limit)?;
    Some(intersect(&xs, &ys))
}

/// Fraction of the segment `{c + s·v : s ∈ [0, 1]}` lying in `o`, or `None`
/// when the segment wraps around the torus more than `limit` times.
pub fn fraction_in(o: &RectUnion, c: Point, v: [f64; 2], limit: usize) -> Option<f64> {
    let mut all = Vec::new();
    for r in &o.rects {
        all.extend(rect_intervals(r, c, v, limit)?);
    }
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in all {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += cb - ca;
    }
    Some(total.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::map::wrap_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn horizontal_segment_through_a_half() {
        let o = RectUnion::new(vec![Rect::new(0.0, 0.5, 0.0, 1.0).unwrap()]);
        let f = fraction_in(&o, [0.25, 0.3], [3.0, 0.0], 100).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let f = fraction_in(&o, [0.1, 0.3], [0.0, 5.0], 100).unwrap();
        assert_eq!(f, 1.0);
        assert!(fraction_in(&o, [0.1, 0.3], [1e6, 0.0], 100).is_none());
    }

    #[test]
    fn agrees_with_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let rects = (0..3)
                .map(|_| {
                    let x0 = rng.random::<f64>();
                    let y0 = rng.random::<f64>();
                    Rect::new(
                        x0,
                        x0 + 0.4 * rng.random::<f64>() + 0.01,
                        y0,
                        y0 + 0.4 * rng.random::<f64>() + 0.01,
                    )
                    .unwrap()
                })
                .collect();
            let o = RectUnion::new(rects);
            let c = [rng.random::<f64>(), rng.random::<f64>()];
            let v = [
                4.0 * rng.random::<f64>() - 2.0,
                4.0 * rng.random::<f64>() - 2.0,
            ];
            let f = fraction_in(&o, c, v, 1000).unwrap();
            let n = 200_000;
            let hits = (0..n)
                .filter(|i| {
                    let s = (*i as f64 + 0.5) / n as f64;
                    o.contains(wrap_point([c[0] + s * v[0], c[1] + s * v[1]]))
                })
                .count();
            assert!((f - hits as f64 / n as f64).abs() < 1e-3, "{f}");
        }
    }
}
