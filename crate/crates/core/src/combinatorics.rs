//! Measure-free ingredients of the covering argument.
//!
//! * Block decomposition: if `N` block averages `a_i ∈ [0, 1]` have mean at
//!   least `δ`, then at least `⌈(1 - (1-δ)/(1-ε))·N⌉` of them are `≥ ε`.
//! * Stirling: `C(N, k) ≤ B(k/N)^N`.
//! * Limsup lemma: if `A_N` is covered by `C·ρ^(-α_N N)` balls of radius
//!   `ρ^N`, then `dim limsup A_N ≤ liminf α_N`.
//! * Discretisation: the continuous-time limsup average is controlled by
//!   integer multiples of `T` up to `1/N_0`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::b_of_z;
use crate::error::{domain, Error, Result};
use crate::numeric::{least_squares, snapped_ceil};

/// Per-block Birkhoff averages `a_1, …, a_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAverageVector {
    a: Vec<f64>,
}

impl BlockAverageVector {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return domain("a block vector needs at least one entry");
        }
        if let Some(v) = a.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return domain(format!("block average {v} is outside [0, 1]"));
        }
        Ok(BlockAverageVector { a })
    }

    pub fn entries(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.a.iter().sum::<f64>() / self.a.len() as f64
    }
}

/// Hypothesis of the limsup lemma: `A_N` is covered by `C·ρ^(-α_N N)` balls
/// of radius `ρ^N` for `N ≥ n0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSchedule {
    pub rho: f64,
    pub c: f64,
    pub n0: usize,
    /// `alpha[i]` is `α_(n0 + i)`.
    pub alpha: Vec<f64>,
}

impl CoverSchedule {
    pub fn new(rho: f64, c: f64, n0: usize, alpha: Vec<f64>) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return domain(format!("rho = {rho} must lie in (0, 1)"));
        }
        if !(c > 0.0) {
            return domain(format!("C = {c} must be positive"));
        }
        if alpha.iter().any(|a| !(*a >= 0.0)) {
            return domain("every alpha_N must be non-negative");
        }
        Ok(CoverSchedule { rho, c, n0, alpha })
    }
}

/// A subset of `{1, …, N}`, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet {
    n: usize,
    elements: Vec<usize>,
}

impl IndexSet {
    pub fn new(n: usize, elements: Vec<usize>) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return domain("index set must be strictly increasing");
        }
        if elements.iter().any(|&i| i == 0 || i > n) {
            return domain(format!("index set elements must lie in 1..={n}"));
        }
        Ok(IndexSet { n, elements })
    }

    /// Builds the set from a bit mask: bit `i - 1` set means `i ∈ J`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let elements = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        IndexSet { n, elements }
    }

    pub fn mask(&self) -> u64 {
        self.elements.iter().fold(0, |m, i| m | 1 << (i - 1))
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.elements.binary_search(&i).is_ok()
    }
}

/// `⌈(1 - (1-δ)/(1-ε))·N⌉`, the least number of blocks with average `≥ ε`.
pub fn min_high_blocks(delta: f64, epsilon: f64, n: usize) -> Result<usize> {
    if !(0.0 < epsilon && epsilon < delta && delta <= 1.0) {
        return domain(format!(
            "need 0 < epsilon < delta <= 1, got epsilon = {epsilon}, delta = {delta}"
        ));
    }
    if n == 0 {
        return domain("N must be positive");
    }
    if delta == 1.0 {
        return Ok(n);
    }
    let z = 1.0 - (1.0 - delta) / (1.0 - epsilon);
    Ok(snapped_ceil(z * n as f64).max(0.0) as usize)
}

/// Exact-rational form of [`min_high_blocks`]; `epsilon = 1` is allowed as
/// the limiting case where every counted block is all-hit.
pub fn min_high_blocks_exact(
    delta: &BigRational,
    epsilon: &BigRational,
    n: usize,
) -> Result<usize> {
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::one();
    if !(&zero < epsilon && epsilon <= &one && &zero < delta && delta <= &one) {
        return domain(format!(
            "need 0 < epsilon <= 1 and 0 < delta <= 1, got {epsilon}, {delta}"
        ));
    }
    if *delta == one {
        return Ok(n);
    }
    if *epsilon == one {
        // (1-δ)/(1-ε) is infinite: no block count is forced.
        return Ok(0);
    }
    let z = &one - (&one - delta) / (&one - epsilon);
    let k = (z * BigRational::from_integer(n.into())).ceil();
    Ok(k.to_integer().to_i64().unwrap_or(0).max(0) as usize)
}

/// Outcome of checking the block-decomposition lemma on one vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub holds: bool,
    /// `J = {i : a_i ≥ ε}`.
    pub j: IndexSet,
    pub required: usize,
}

/// Checks the block-decomposition lemma for one vector.
///
/// A vector whose mean falls below `delta` (beyond `1e-12` rounding slack)
/// is a [`Error::Precondition`] violation, not a lemma failure.
pub fn check_block_decomposition(
    v: &BlockAverageVector,
    delta: f64,
    epsilon: f64,
) -> Result<BlockCheck> {
    let required = min_high_blocks(delta, epsilon, v.len())?;
    let mean = v.mean();
    if mean < delta - 1e-12 {
        return Err(Error::Precondition(format!(
            "mean {mean} of the block averages is below delta = {delta}"
        )));
    }
    let elements: Vec<usize> = v
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a >= epsilon)
        .map(|(i, _)| i + 1)
        .collect();
    let j = IndexSet {
        n: v.len(),
        elements,
    };
    Ok(BlockCheck {
        holds: j.len() >= required,
        j,
        required,
    })
}

/// Exact binomial `C(N, k)` against its entropy bound `B(k/N)^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingCheck {
    pub n: usize,
    pub k: usize,
    pub exact: BigUint,
    pub bound: f64,
    pub holds: bool,
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// Compares `C(N, ⌈zN⌉)` with `B(⌈zN⌉/N)^N`. The verdict is exact:
/// `B(k/N)^N = N^N / (k^k (N-k)^(N-k))`, so the check is
/// `C(N, k)·k^k·(N-k)^(N-k) ≤ N^N` in integers. `bound` is for display.
pub fn binomial_vs_stirling(n: usize, z: f64) -> Result<StirlingCheck> {
    if n == 0 {
        return domain("N must be positive");
    }
    if !(z > 0.0 && z < 1.0) {
        return domain(format!("z = {z} must lie in (0, 1)"));
    }
    let k = (snapped_ceil(z * n as f64) as usize).min(n);
    let exact = binomial(n, k);
    let bound = b_of_z(k as f64 / n as f64)?.powi(n as i32);
    let pow = |b: usize, e: usize| BigUint::from(b).pow(e as u32);
    let holds = &exact * pow(k, k) * pow(n - k, n - k) <= pow(n, n);
    Ok(StirlingCheck {
        n,
        k,
        holds,
        exact,
        bound,
    })
}

pub const MAX_N0_SCAN: usize = 512;

/// Smallest `N0` such that the Stirling bound holds for every
/// `N ∈ [N0, n_max]`; `n_max + 1` if it fails at `n_max` itself.
pub fn find_n0(z: f64, n_max: usize) -> Result<usize> {
    if n_max == 0 || n_max > MAX_N0_SCAN {
        return domain(format!("N_max = {n_max} must lie in 1..={MAX_N0_SCAN}"));
    }
    for n in (1..=n_max).rev() {
        if !binomial_vs_stirling(n, z)?.holds {
            return Ok(n + 1);
        }
    }
    Ok(1)
}

/// `liminf α_N` estimated on a finite window: the minimum over the latter
/// half of the supplied values. Callers should pass windows on which `α_N`
/// has settled.
pub fn limsup_dim_bound(cs: &CoverSchedule) -> Result<f64> {
    if cs.alpha.is_empty() {
        return domain("cover schedule is empty");
    }
    let tail = &cs.alpha[cs.alpha.len() / 2..];
    Ok(tail.iter().copied().fold(f64::INFINITY, f64::min))
}

/// One level of a cover: open intervals `(center - radius, center + radius)`
/// to be counted on a grid of mesh `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverLevel {
    pub scale: f64,
    pub intervals: Vec<(f64, f64)>,
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

impl CoverLevel {
    /// Number of grid cells `[k s, (k+1) s)` meeting some interval.
    pub fn box_count(&self) -> usize {
        let s = self.scale;
        let mut ranges: Vec<(i64, i64)> = self
            .intervals
            .iter()
            .filter(|(_, r)| *r > 0.0)
            .map(|&(c, r)| {
                let lo = snap((c - r) / s).floor() as i64;
                let hi = snap((c + r) / s).ceil() as i64 - 1;
                (lo, hi)
            })
            .filter(|(lo, hi)| lo <= hi)
            .collect();
        ranges.sort_unstable();
        let mut count = 0i64;
        let mut covered_to = i64::MIN;
        for (lo, hi) in ranges {
            let start = lo.max(covered_to.saturating_add(1));
            if hi >= start {
                count += hi - start + 1;
            }
            covered_to = covered_to.max(hi);
        }
        count as usize
    }
}

/// Least-squares slope of `ln(count)` against `ln(1/scale)`.
pub fn box_count_dimension(levels: &[CoverLevel]) -> Result<f64> {
    if levels.len() < 3 {
        return domain(format!("need at least 3 scales, got {}", levels.len()));
    }
    if levels.iter().any(|l| !(l.scale > 0.0)) {
        return domain("scales must be positive");
    }
    let distinct: BTreeSet<u64> = levels.iter().map(|l| l.scale.to_bits()).collect();
    if distinct.len() < 2 {
        return Err(Error::DegenerateFit("all scales are equal".into()));
    }
    let xs: Vec<f64> = levels.iter().map(|l| (1.0 / l.scale).ln()).collect();
    let ys: Vec<f64> = levels
        .iter()
        .map(|l| (l.box_count().max(1) as f64).ln())
        .collect();
    Ok(least_squares(&xs, &ys)?.slope)
}

/// Level-`n` intervals of the middle-thirds Cantor construction at mesh
/// `3^-n`.
pub fn cantor_level(n: u32) -> CoverLevel {
    let len = 3f64.powi(-(n as i32));
    let mut lefts = vec![0.0f64];
    for k in 1..=n {
        let piece = 3f64.powi(-(k as i32));
        lefts = lefts.iter().flat_map(|&a| [a, a + 2.0 * piece]).collect();
    }
    CoverLevel {
        scale: len,
        intervals: lefts
            .into_iter()
            .map(|a| (a + len / 2.0, len / 2.0))
            .collect(),
    }
}

/// Level-`n` dyadic partition of `[0, 1]` at mesh `2^-n`.
pub fn dyadic_level(n: u32) -> CoverLevel {
    let len = 2f64.powi(-(n as i32));
    CoverLevel {
        scale: len,
        intervals: (0..1u64 << n)
            .map(|i| ((i as f64 + 0.5) * len, len / 2.0))
            .collect(),
    }
}

/// A `{0, 1}`-valued step function on `[0, R_max]`: `values[i]` holds on
/// `[knots[i], knots[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<bool>,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<bool>) -> Result<Self> {
        if knots.len() != values.len() + 1 || values.is_empty() {
            return domain("need exactly one more knot than values");
        }
        if knots[0] != 0.0 {
            return domain("the first knot must be 0");
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("knots must be strictly increasing");
        }
        Ok(StepFunction { knots, values })
    }

    pub fn r_max(&self) -> f64 {
        *self.knots.last().expect("non-empty by construction")
    }

    /// `∫_0^R f`, for `R ∈ [0, R_max]`.
    pub fn integral(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (w, &v) in self.knots.windows(2).zip(&self.values) {
            if r <= w[0] {
                break;
            }
            if v {
                acc += r.min(w[1]) - w[0];
            }
        }
        acc
    }
}

/// Both sides of the discretisation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    /// `sup_{R ∈ [N0 T, R_max]} (1/R) ∫_0^R f`.
    pub continuous_sup: f64,
    /// `max_{N ∈ [N0, ⌊R_max/T⌋]} (1/NT) ∫_0^{NT} f + 1/N0`.
    pub discrete_bound: f64,
    pub holds: bool,
}

/// Checks the discretisation inequality exactly: on each piece the running
/// average is monotone, so the continuous supremum is attained at a knot or
/// at an end of the range.
pub fn discretization_gap(f: &StepFunction, t: f64, n0: usize) -> Result<GapCheck> {
    if !(t > 0.0) || n0 == 0 {
        return domain("need T > 0 and N0 >= 1");
    }
    let r_max = f.r_max();
    let start = n0 as f64 * t;
    if r_max < (n0 as f64 + 2.0) * t {
        return domain(format!("R_max = {r_max} must be at least (N0 + 2)·T"));
    }
    let avg = |r: f64| f.integral(r) / r;
    let continuous_sup = f
        .knots
        .iter()
        .copied()
        .filter(|&k| k > start && k < r_max)
        .chain([start, r_max])
        .map(avg)
        .fold(f64::NEG_INFINITY, f64::max);
    let n_hi = (r_max / t + 1e-12).floor() as usize;
    let discrete_max = (n0..=n_hi)
        .map(|n| avg((n as f64 * t).min(r_max)))
        .fold(f64::NEG_INFINITY, f64::max);
    let discrete_bound = discrete_max + 1.0 / n0 as f64;
    Ok(GapCheck {
        continuous_sup,
        discrete_bound,
        holds: continuous_sup <= discrete_bound + 1e-12,
    })
}

/// Tally of a randomised or exhaustive lemma suite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteTally {
    pub cases: u64,
    pub failures: u64,
}

impl SuiteTally {
    pub fn merge(self, other: SuiteTally) -> SuiteTally {
        SuiteTally {
            cases: self.cases + other.cases,
            failures: self.failures + other.failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const BATCH: u64 = 10_000;

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// `δ` values of the block-lemma grid.
pub const BLOCK_DELTAS: [f64; 5] = [0.3, 0.5, 0.7, 0.9, 1.0];
/// `ε` values of the block-lemma grid; each lies below every `δ`.
pub const BLOCK_EPSILONS: [f64; 5] = [0.05, 0.1, 0.15, 0.2, 0.25];

/// `z = k/20` for `k = 1..=19`.
pub fn stirling_grid() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

/// Stirling comparison over `N = 1..=n_max` and every `z` in `zs`.
pub fn stirling_suite(n_max: usize, zs: &[f64]) -> Result<SuiteTally> {
    let mut tally = SuiteTally::default();
    for n in 1..=n_max {
        for &z in zs {
            tally.cases += 1;
            tally.failures += u64::from(!binomial_vs_stirling(n, z)?.holds);
        }
    }
    Ok(tally)
}

/// A random block vector of length `n` with mean at least `delta`.
///
/// Entries are drawn from a mixture that puts mass on `{0, ε, 1}` and on
/// uniform values, then pushed towards 1 until the mean reaches `delta`.
pub fn random_block_vector(
    rng: &mut impl Rng,
    n: usize,
    delta: f64,
    epsilon: f64,
) -> BlockAverageVector {
    let mut a: Vec<f64> = (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => epsilon,
            2 => 1.0,
            _ => rng.random::<f64>(),
        })
        .collect();
    let mean = a.iter().sum::<f64>() / n as f64;
    if mean < delta {
        let theta = ((delta - mean) / (1.0 - mean) + 1e-12).min(1.0);
        for v in &mut a {
            *v = (*v + (1.0 - *v) * theta).min(1.0);
        }
    }
    // Rounding can leave the mean a hair short; top up one entry at a time.
    let mut i = 0;
    while a.iter().sum::<f64>() / (n as f64) < delta && i < n {
        a[i] = 1.0;
        i += 1;
    }
    BlockAverageVector { a }
}

/// Checks the block lemma on `count` random vectors with `N ∈ [1, 64]`,
/// in independently seeded batches.
pub fn random_block_suite(delta: f64, epsilon: f64, count: u64, seed: u64) -> Result<SuiteTally> {
    min_high_blocks(delta, epsilon, 1)?;
    let batches = count.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let size = BATCH.min(count - b * BATCH);
            let mut tally = SuiteTally::default();
            for _ in 0..size {
                let n = rng.random_range(1..=64);
                let v = random_block_vector(&mut rng, n, delta, epsilon);
                let ok = check_block_decomposition(&v, delta, epsilon)?.holds;
                tally.cases += 1;
                tally.failures += u64::from(!ok);
            }
            Ok(tally)
        })
        .try_reduce(SuiteTally::default, |a, b| Ok(a.merge(b)))
}

/// Checks the block lemma on every vector in `{0, ε, 1}^N` with mean at
/// least `delta`, for `N = 1..=n_max`.
pub fn exhaustive_block_suite(delta: f64, epsilon: f64, n_max: usize) -> Result<SuiteTally> {
    if n_max > 12 {
        return Err(Error::Budget(format!("3^{n_max} vectors is too many")));
    }
    let levels = [0.0, epsilon, 1.0];
    let mut tally = SuiteTally::default();
    for n in 1..=n_max {
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let a: Vec<f64> = (0..n)
                .map(|_| {
                    let v = levels[c % 3];
                    c /= 3;
                    v
                })
                .collect();
            let v = BlockAverageVector { a };
            if v.mean() < delta - 1e-12 {
                continue;
            }
            tally.cases += 1;
            tally.failures += u64::from(!check_block_decomposition(&v, delta, epsilon)?.holds);
        }
    }
    Ok(tally)
}

/// A random step function on `[0, R_max]` with `R_max ≥ (N0 + 2)·T`.
pub fn random_step_function(rng: &mut impl Rng, t: f64, n0: usize) -> StepFunction {
    let r_max = (n0 as f64 + 2.0) * t * (1.0 + 4.0 * rng.random::<f64>());
    let pieces = rng.random_range(1..=40);
    let mut cuts: Vec<f64> = (0..pieces - 1)
        .map(|_| rng.random::<f64>() * r_max)
        .collect();
    cuts.push(0.0);
    cuts.push(r_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let values = (0..cuts.len() - 1).map(|_| rng.random_bool(0.5)).collect();
    StepFunction {
        knots: cuts,
        values,
    }
}

/// Checks the discretisation inequality on `count` random step functions.
pub fn random_gap_suite(count: u64, seed: u64) -> Result<SuiteTally> {
    let batches = count.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed ^ 0x05ee_d9a9, b);
            let size = BATCH.min(count - b * BATCH);
            let mut tally = SuiteTally::default();
            for _ in 0..size {
                let t = 0.1 + 4.9 * rng.random::<f64>();
                let n0 = rng.random_range(1..=10);
                let f = random_step_function(&mut rng, t, n0);
                tally.cases += 1;
                tally.failures += u64::from(!discretization_gap(&f, t, n0)?.holds);
            }
            Ok(tally)
        })
        .try_reduce(SuiteTally::default, |a, b| Ok(a.merge(b)))
}
