use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::{wrap, Point};
use crate::combinatorics::SuiteTally;
use crate::error::{domain, Error, Result};

/// An open axis-parallel rectangle on the torus. Coordinates are real and
/// read modulo 1; a side of length 1 is the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        for (a, b) in [(x0, x1), (y0, y1)] {
            if !(a.is_finite() && b.is_finite() && a < b && b - a <= 1.0) {
                return domain(format!("side ({a}, {b}) must satisfy a < b <= a + 1"));
            }
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn full() -> Self {
        Rect {
            x0: 0.0,
            x1: 1.0,
            y0: 0.0,
            y1: 1.0,
        }
    }

    fn side_contains(a: f64, b: f64, x: f64) -> bool {
        if b - a >= 1.0 {
            return true;
        }
        let d = wrap(x - a);
        d > 0.0 && d < b - a
    }

    pub fn contains(&self, p: Point) -> bool {
        Self::side_contains(self.x0, self.x1, p[0]) && Self::side_contains(self.y0, self.y1, p[1])
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Shrinks by `r` on every side; `None` when nothing is left. A full
    /// side stays full.
    pub fn eroded(&self, r: f64) -> Option<Rect> {
        let side = |a: f64, b: f64| {
            if b - a >= 1.0 {
                Some((a, b))
            } else if b - a > 2.0 * r {
                Some((a + r, b - r))
            } else {
                None
            }
        };
        let (x0, x1) = side(self.x0, self.x1)?;
        let (y0, y1) = side(self.y0, self.y1)?;
        Some(Rect { x0, x1, y0, y1 })
    }

    /// Grows by `r` on every side, saturating at the full circle.
    pub fn dilated(&self, r: f64) -> Rect {
        let side = |a: f64, b: f64| {
            if b - a + 2.0 * r >= 1.0 {
                (0.0, 1.0)
            } else {
                (a - r, b + r)
            }
        };
        let (x0, x1) = side(self.x0, self.x1);
        let (y0, y1) = side(self.y0, self.y1);
        Rect { x0, x1, y0, y1 }
    }

    /// Pieces inside `[0, 1]²` whose union equals the rectangle mod 1.
    fn unwrapped(&self) -> Vec<[f64; 4]> {
        let split = |a: f64, b: f64| -> Vec<(f64, f64)> {
            if b - a >= 1.0 {
                return vec![(0.0, 1.0)];
            }
            let s = wrap(a);
            let e = s + (b - a);
            if e <= 1.0 {
                vec![(s, e)]
            } else {
                vec![(s, 1.0), (0.0, e - 1.0)]
            }
        };
        let mut out = Vec::new();
        for (x0, x1) in split(self.x0, self.x1) {
            for &(y0, y1) in &split(self.y0, self.y1) {
                out.push([x0, x1, y0, y1]);
            }
        }
        out
    }
}

/// A finite union of open rectangles: the open set `O`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RectUnion {
    pub rects: Vec<Rect>,
}

/// Coordinate-compressed cells of `[0, 1]²` and which of them a union covers.
struct Compressed {
    xs: Vec<f64>,
    ys: Vec<f64>,
    covered: Vec<bool>,
}

fn compress(pieces: &[[f64; 4]]) -> Compressed {
    let mut xs = vec![0.0, 1.0];
    let mut ys = vec![0.0, 1.0];
    for p in pieces {
        xs.extend([p[0], p[1]]);
        ys.extend([p[2], p[3]]);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut covered = vec![false; (xs.len() - 1) * (ys.len() - 1)];
    for (i, xw) in xs.windows(2).enumerate() {
        let cx = 0.5 * (xw[0] + xw[1]);
        for (j, yw) in ys.windows(2).enumerate() {
            let cy = 0.5 * (yw[0] + yw[1]);
            covered[i * (ys.len() - 1) + j] = pieces
                .iter()
                .any(|p| p[0] < cx && cx < p[1] && p[2] < cy && cy < p[3]);
        }
    }
    Compressed { xs, ys, covered }
}

impl RectUnion {
    pub fn new(rects: Vec<Rect>) -> Self {
        RectUnion { rects }
    }

    pub fn empty() -> Self {
        RectUnion { rects: Vec::new() }
    }

    pub fn full() -> Self {
        RectUnion {
            rects: vec![Rect::full()],
        }
    }

    /// The torus minus the closed square of side `side` centred at `c`.
    pub fn complement_of_square(c: Point, side: f64) -> Result<Self> {
        if !(side > 0.0 && side < 1.0) {
            return domain(format!("square side {side} must lie in (0, 1)"));
        }
        let h = side / 2.0;
        Ok(RectUnion {
            rects: vec![
                Rect::new(c[0] + h, c[0] - h + 1.0, 0.0, 1.0)?,
                Rect::new(0.0, 1.0, c[1] + h, c[1] - h + 1.0)?,
            ],
        })
    }

    pub fn contains(&self, p: Point) -> bool {
        self.rects.iter().any(|r| r.contains(p))
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    fn pieces(&self) -> Vec<[f64; 4]> {
        self.rects.iter().flat_map(Rect::unwrapped).collect()
    }

    /// Exact area of the union, by coordinate compression.
    pub fn area(&self) -> f64 {
        let c = compress(&self.pieces());
        let ny = c.ys.len() - 1;
        c.covered
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(k, _)| (c.xs[k / ny + 1] - c.xs[k / ny]) * (c.ys[k % ny + 1] - c.ys[k % ny]))
            .sum()
    }

    /// The complement as a union of (closed, up to measure zero) cells.
    pub fn complement(&self) -> RectUnion {
        let c = compress(&self.pieces());
        let ny = c.ys.len() - 1;
        let rects = c
            .covered
            .iter()
            .enumerate()
            .filter(|(_, &v)| !v)
            .map(|(k, _)| Rect {
                x0: c.xs[k / ny],
                x1: c.xs[k / ny + 1],
                y0: c.ys[k % ny],
                y1: c.ys[k % ny + 1],
            })
            .collect();
        RectUnion { rects }
    }

    /// Union of the `r`-dilations of the rectangles (dilation distributes
    /// over unions, so this is exactly the `r`-neighbourhood).
    pub fn dilated(&self, r: f64) -> RectUnion {
        RectUnion {
            rects: self.rects.iter().map(|x| x.dilated(r)).collect(),
        }
    }

    /// Exact `μ(σ_r O) = 1 - μ((O^c)^(r))`.
    pub fn core_measure(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.area();
        }
        (1.0 - self.complement().dilated(r).area()).max(0.0)
    }

    /// Exact measure of the `r`-neighbourhood.
    pub fn neighborhood_measure(&self, r: f64) -> f64 {
        self.dilated(r.max(0.0)).area()
    }
}

/// A set on a uniform `n × n` grid of cells, membership decided at cell
/// centres.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMask {
    pub n: usize,
    pub cells: Vec<bool>,
}

impl GridMask {
    pub fn rasterize(o: &RectUnion, n: usize) -> Self {
        let mut cells = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let p = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                cells[i * n + j] = o.contains(p);
            }
        }
        GridMask { n, cells }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let f = |x: f64| ((wrap(x) * self.n as f64) as usize).min(self.n - 1);
        (f(p[0]), f(p[1]))
    }

    pub fn contains(&self, p: Point) -> bool {
        let (i, j) = self.cell_of(p);
        self.get(i, j)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Cells in the set with a 4-neighbour outside it.
    pub fn boundary_count(&self) -> usize {
        let n = self.n;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                self.get(i, j)
                    && [
                        ((i + 1) % n, j),
                        ((i + n - 1) % n, j),
                        (i, (j + 1) % n),
                        (i, (j + n - 1) % n),
                    ]
                    .iter()
                    .any(|&(a, b)| !self.get(a, b))
            })
            .count()
    }

    /// `(measure, error bar)`: cell count times cell area, and the boundary
    /// cell count times cell area.
    pub fn measure(&self) -> (f64, f64) {
        let cell = 1.0 / (self.n * self.n) as f64;
        (
            self.count() as f64 * cell,
            self.boundary_count() as f64 * cell,
        )
    }

    /// Sup-metric window of half-width `k` cells, combined by `all` (erosion)
    /// or `any` (dilation), one axis at a time with wrapped prefix sums.
    fn morph(&self, k: usize, erode: bool) -> GridMask {
        let n = self.n;
        let window = 2 * k + 1;
        let pass = |src: &[bool], along_rows: bool| -> Vec<bool> {
            let mut out = vec![false; n * n];
            for line in 0..n {
                let at = |p: usize| {
                    if along_rows {
                        line * n + p
                    } else {
                        p * n + line
                    }
                };
                if window >= n {
                    let cnt = (0..n).filter(|&p| src[at(p)]).count();
                    let v = if erode { cnt == n } else { cnt > 0 };
                    for p in 0..n {
                        out[at(p)] = v;
                    }
                    continue;
                }
                let mut prefix = vec![0usize; 3 * n + 1];
                for q in 0..3 * n {
                    prefix[q + 1] = prefix[q] + usize::from(src[at(q % n)]);
                }
                for p in 0..n {
                    let c = prefix[n + p + k + 1] - prefix[n + p - k];
                    out[at(p)] = if erode { c == window } else { c > 0 };
                }
            }
            out
        };
        let rows = pass(&self.cells, true);
        GridMask {
            n,
            cells: pass(&rows, false),
        }
    }
}

/// Result of an erosion or dilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// Exact rectangles.
    Rects(RectUnion),
    /// Grid approximation.
    Grid(GridMask),
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Rects(u) => u.contains(p),
            Region::Grid(g) => g.contains(p),
        }
    }

    /// `(measure, error bar)`; the error bar is zero for exact rectangles.
    pub fn measure(&self) -> (f64, f64) {
        match self {
            Region::Rects(u) => (u.area(), 0.0),
            Region::Grid(g) => g.measure(),
        }
    }
}

fn grid_radius(r: f64, n: usize) -> Result<usize> {
    if !(r > 0.0) {
        return domain(format!("radius {r} must be positive"));
    }
    if n == 0 || 1.0 / n as f64 > r / 8.0 * (1.0 + 1e-12) {
        return Err(Error::Resolution {
            cell: 1.0 / n.max(1) as f64,
            radius: r,
        });
    }
    Ok((r * n as f64 + 1e-9).floor() as usize)
}

/// The inner core `σ_r O = {x : dist(x, O^c) > r}` in the sup metric.
///
/// A single rectangle is eroded exactly; a union is eroded on an `n × n`
/// grid, which must have cells no larger than `r/8`.
pub fn sigma_core(o: &RectUnion, r: f64, n: usize) -> Result<Region> {
    let k = grid_radius(r, n)?;
    match o.rects.as_slice() {
        [] => Ok(Region::Rects(RectUnion::empty())),
        [single] => Ok(Region::Rects(RectUnion::new(
            single.eroded(r).into_iter().collect(),
        ))),
        _ => Ok(Region::Grid(GridMask::rasterize(o, n).morph(k, true))),
    }
}

/// The `r`-neighbourhood of `O`: exact for a single rectangle, on the grid
/// otherwise.
pub fn neighborhood(o: &RectUnion, r: f64, n: usize) -> Result<Region> {
    let k = grid_radius(r, n)?;
    match o.rects.as_slice() {
        [] => Ok(Region::Rects(RectUnion::empty())),
        [single] => Ok(Region::Rects(RectUnion::new(vec![single.dilated(r)]))),
        _ => Ok(Region::Grid(GridMask::rasterize(o, n).morph(k, false))),
    }
}

/// Grid erosion and dilation of a mask, exposed for closing checks.
pub fn grid_erode(g: &GridMask, r: f64) -> Result<GridMask> {
    Ok(g.morph(grid_radius(r, g.n)?, true))
}

pub fn grid_dilate(g: &GridMask, r: f64) -> Result<GridMask> {
    Ok(g.morph(grid_radius(r, g.n)?, false))
}

/// Checks `σ_r O ⊆ O ⊆ O^(r)` and `σ_r(O^(r)) ⊇ O` cell by cell on an
/// `n × n` grid.
pub fn metric_duality_holds(o: &RectUnion, r: f64, n: usize) -> Result<bool> {
    let k = grid_radius(r, n)?;
    let raster = GridMask::rasterize(o, n);
    let core = raster.morph(k, true);
    let nb = raster.morph(k, false);
    let closing = nb.morph(k, true);
    Ok((0..n * n).all(|c| {
        let inside = raster.cells[c];
        (!core.cells[c] || inside) && (!inside || (nb.cells[c] && closing.cells[c]))
    }))
}

/// A rectangle with a uniform corner and sides in `[0.1, 0.6)`, wrapping
/// as needed.
pub fn random_rect(rng: &mut impl Rng) -> Rect {
    let x0 = rng.random::<f64>();
    let y0 = rng.random::<f64>();
    Rect::new(
        x0,
        x0 + 0.1 + 0.5 * rng.random::<f64>(),
        y0,
        y0 + 0.1 + 0.5 * rng.random::<f64>(),
    )
    .expect("sides lie in (0, 1)")
}

/// [`metric_duality_holds`] on `count` random three-rectangle unions with
/// `r ∈ [0.05, 0.1)` on a 160-cell grid.
pub fn random_duality_suite(count: u64, seed: u64) -> Result<SuiteTally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = SuiteTally::default();
    for _ in 0..count {
        let o = RectUnion::new((0..3).map(|_| random_rect(&mut rng)).collect());
        let r = 0.05 + 0.05 * rng.random::<f64>();
        tally.cases += 1;
        tally.failures += u64::from(!metric_duality_holds(&o, r, 160)?);
    }
    Ok(tally)
}
