//! The full binary shift with the uniform Bernoulli measure.
//!
//! Depth-`t` cylinders are exactly the Bowen `(t, r)`-boxes, the measure of
//! a cylinder of depth `n` is `2^-n`, and equidistribution holds exactly
//! after a burn-in equal to the target depth `d`. Every count and every
//! bound below is an exact integer or rational.
//!
//! A target `S` is a union of depth-`d` cylinders and plays the complement
//! of the open set, so `1 - μ(O) = μ(S)` and the model constant is
//! `C = μ(S) + d/T`. With `η = ln 2` and `c0 = 0` the covering bounds read
//!
//! ```text
//! #{depth-NT cylinders meeting A_J}  ≤ 2^(NT) · (C/ε)^|J|
//! #{depth-NT cylinders meeting A(δ)} ≤ 2^(NT) · C(N, k) · (C/ε)^k,   k = ⌈zN⌉
//! ```
//!
//! Time is discrete: the average over `[0, T)` is `(1/T) Σ_{t<T} 1_S(σ^t w)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, min_high_blocks_exact, IndexSet, SuiteTally};
use crate::error::{domain, Error, Result};

/// Longest word the exhaustive routines will enumerate.
pub const MAX_WORD_LEN: usize = 30;

/// Deepest target the block-mask sweep handles (it tracks `2^(d-1)`
/// extensions of each cylinder).
pub const MAX_SWEEP_DEPTH: usize = 4;

/// A finite 0/1 word; symbol `t` is bit `t` of `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolWord {
    bits: u32,
    len: u8,
}

impl SymbolWord {
    pub fn new(bits: u32, len: usize) -> Result<Self> {
        if len > MAX_WORD_LEN {
            return Err(Error::Budget(format!(
                "word length {len} exceeds {MAX_WORD_LEN}"
            )));
        }
        if len < 32 && bits >> len != 0 {
            return domain(format!("bits {bits:#b} do not fit in length {len}"));
        }
        Ok(SymbolWord {
            bits,
            len: len as u8,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn symbol(&self, t: usize) -> u8 {
        (self.bits >> t & 1) as u8
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> SymbolWord {
        let n = n.min(self.len());
        SymbolWord {
            bits: self.bits & low_mask(n),
            len: n as u8,
        }
    }
}

fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 0..self.len() {
            write!(f, "{}", self.symbol(t))?;
        }
        Ok(())
    }
}

impl FromStr for SymbolWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u32;
        for (t, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' if t < 32 => bits |= 1 << t,
                '1' => {}
                _ => {
                    return Err(Error::Parse(format!(
                        "'{c}' is not a binary symbol in {s:?}"
                    )))
                }
            }
        }
        SymbolWord::new(bits, s.chars().count())
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A union of depth-`d` cylinders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderTarget {
    depth: usize,
    words: BTreeSet<u32>,
    member: Vec<bool>,
}

impl CylinderTarget {
    pub fn new(depth: usize, words: impl IntoIterator<Item = SymbolWord>) -> Result<Self> {
        if depth == 0 || depth > 16 {
            return domain(format!("target depth {depth} must lie in 1..=16"));
        }
        let mut set = BTreeSet::new();
        for w in words {
            if w.len() != depth {
                return domain(format!("word {w} does not have length {depth}"));
            }
            set.insert(w.bits());
        }
        let mut member = vec![false; 1 << depth];
        for &b in &set {
            member[b as usize] = true;
        }
        Ok(CylinderTarget {
            depth,
            words: set,
            member,
        })
    }

    /// Parses one word per line; blank lines and lines starting with `#`
    /// are skipped. A file with no words is the empty depth-1 target.
    pub fn parse(text: &str) -> Result<Self> {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(SymbolWord::from_str)
            .collect::<Result<Vec<_>>>()?;
        let depth = words.first().map_or(1, SymbolWord::len);
        CylinderTarget::new(depth, words)
    }

    /// Every subset of the `2^d` words of depth `d`, in mask order.
    pub fn all_of_depth(depth: usize) -> Result<Vec<Self>> {
        if depth == 0 || depth > 3 {
            return domain(format!(
                "enumerating all targets needs depth 1..=3, got {depth}"
            ));
        }
        let n_words = 1usize << depth;
        (0..1u64 << n_words)
            .map(|mask| {
                let words = (0..n_words)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| SymbolWord::new(b as u32, depth).expect("fits"));
                CylinderTarget::new(depth, words)
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn words(&self) -> Vec<SymbolWord> {
        self.words
            .iter()
            .map(|&b| SymbolWord {
                bits: b,
                len: self.depth as u8,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `μ(S) = |words| / 2^d`.
    pub fn measure(&self) -> BigRational {
        BigRational::new(BigInt::from(self.len()), BigInt::from(1u64 << self.depth))
    }

    /// The complement target at the same depth.
    pub fn complement(&self) -> CylinderTarget {
        let words = (0..1u32 << self.depth)
            .filter(|b| !self.words.contains(b))
            .map(|b| SymbolWord {
                bits: b,
                len: self.depth as u8,
            });
        CylinderTarget::new(self.depth, words).expect("same depth")
    }

    /// Whether `σ^t w` lies in the target, reading symbols `t..t+d`.
    fn hit(&self, bits: u32, t: usize) -> bool {
        self.member[((bits >> t) & low_mask(self.depth)) as usize]
    }

    /// `C = μ(S) + d/T`: one minus the measure of the open set plus the
    /// depth-`d` burn-in.
    pub fn model_constant(&self, t: usize) -> BigRational {
        self.measure() + BigRational::new(BigInt::from(self.depth), BigInt::from(t))
    }
}

impl fmt::Display for CylinderTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self.words().iter().map(ToString::to_string).collect();
        write!(f, "d={}:{{{}}}", self.depth, words.join(","))
    }
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn hits_in(bits: u32, s: &CylinderTarget, from: usize, to: usize) -> usize {
    (from..to).filter(|&t| s.hit(bits, t)).count()
}

/// Smallest hit count `h` with `h / len ≥ q`.
fn hit_threshold(q: &BigRational, len: usize) -> usize {
    let need = (q * BigRational::from_integer(len.into())).ceil();
    need.to_integer().to_i64().unwrap_or(0).max(0) as usize
}

/// Average of `1_S(σ^t w)` over the `i`-th block `t ∈ [(i-1)T, iT)`.
pub fn block_average(
    w: &SymbolWord,
    s: &CylinderTarget,
    t: usize,
    i: usize,
) -> Result<BigRational> {
    if t == 0 || i == 0 {
        return domain("T and i must be positive");
    }
    let need = i * t + s.depth() - 1;
    if w.len() < need {
        return domain(format!(
            "word of length {} is shorter than iT + d - 1 = {need}",
            w.len()
        ));
    }
    let h = hits_in(w.bits(), s, (i - 1) * t, i * t);
    Ok(rat(h as i64, t as i64))
}

fn word_len(n: usize, t: usize, s: &CylinderTarget) -> Result<usize> {
    if n == 0 || t == 0 {
        return domain("N and T must be positive");
    }
    let len = n * t + s.depth() - 1;
    if len > MAX_WORD_LEN {
        return Err(Error::Budget(format!(
            "N·T + d - 1 = {len} exceeds the word budget {MAX_WORD_LEN}"
        )));
    }
    Ok(len)
}

fn check_unit_rational(name: &str, q: &BigRational, allow_zero: bool) -> Result<()> {
    let lower_ok = if allow_zero {
        !q.is_negative()
    } else {
        q.is_positive()
    };
    if !lower_ok || q > &BigRational::one() {
        return domain(format!("{name} = {q} is outside the admissible range"));
    }
    Ok(())
}

/// All words of length `NT + d - 1` whose average of `1_S` over `[0, NT)`
/// is at least `delta`.
pub fn enumerate_a(
    n: usize,
    t: usize,
    delta: &BigRational,
    s: &CylinderTarget,
) -> Result<Vec<SymbolWord>> {
    check_unit_rational("delta", delta, true)?;
    let len = word_len(n, t, s)?;
    let need = hit_threshold(delta, n * t);
    Ok((0..=low_mask(len))
        .filter(|&b| hits_in(b, s, 0, n * t) >= need)
        .map(|b| SymbolWord {
            bits: b,
            len: len as u8,
        })
        .collect())
}

/// All words of length `NT + d - 1` whose `i`-th block average is at least
/// `epsilon` for every `i ∈ J`.
pub fn enumerate_a_j(
    t: usize,
    epsilon: &BigRational,
    s: &CylinderTarget,
    j: &IndexSet,
    n: usize,
) -> Result<Vec<SymbolWord>> {
    check_unit_rational("epsilon", epsilon, false)?;
    if j.universe() != n {
        return domain(format!(
            "index set is over 1..={}, expected N = {n}",
            j.universe()
        ));
    }
    let len = word_len(n, t, s)?;
    let need = hit_threshold(epsilon, t);
    Ok((0..=low_mask(len))
        .filter(|&b| {
            j.elements()
                .iter()
                .all(|&i| hits_in(b, s, (i - 1) * t, i * t) >= need)
        })
        .map(|b| SymbolWord {
            bits: b,
            len: len as u8,
        })
        .collect())
}

/// Number of distinct depth-`depth` cylinders meeting a set of words.
pub fn cylinder_count(words: &[SymbolWord], depth: usize) -> u64 {
    let set: BTreeSet<u32> = words.iter().map(|w| w.prefix(depth).bits()).collect();
    set.len() as u64
}

/// Inputs echoed in a [`ShiftCoverReport`]; rationals are written `p/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftParams {
    pub n: usize,
    pub t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    pub epsilon: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<usize>>,
    /// Number of high blocks `⌈zN⌉` used by the Bowen-ball bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub target: String,
    pub model_constant: String,
}

/// Exact cylinder count against the covering bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftCoverReport {
    pub params: ShiftParams,
    pub exact_count: u64,
    pub bound: f64,
    pub bound_exact: String,
    pub ratio: f64,
    pub verified: bool,
}

fn report(params: ShiftParams, count: u64, bound: &BigRational) -> ShiftCoverReport {
    let count_q = BigRational::from_integer(count.into());
    let bound_f = rat_to_f64(bound);
    ShiftCoverReport {
        params,
        exact_count: count,
        bound: bound_f,
        bound_exact: bound.to_string(),
        ratio: rat_to_f64(&(count_q.clone() / bound)),
        verified: count_q <= *bound,
    }
}

fn pow_rational(q: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * q)
}

/// `2^(NT) · (C/ε)^|J|`.
fn uppcov_bound(
    n: usize,
    t: usize,
    epsilon: &BigRational,
    s: &CylinderTarget,
    size: usize,
) -> BigRational {
    let c = s.model_constant(t);
    BigRational::from_integer(BigInt::one() << (n * t)) * pow_rational(&(c / epsilon), size)
}

/// `2^(NT) · C(N, k) · (C/ε)^k` with `C1 = 1`.
fn bowen_bound(
    n: usize,
    t: usize,
    epsilon: &BigRational,
    s: &CylinderTarget,
    k: usize,
) -> BigRational {
    let binom = BigRational::from_integer(BigInt::from(binomial(n, k)));
    uppcov_bound(n, t, epsilon, s, k) * binom
}

/// Counts the depth-`NT` cylinders meeting `A_J` by enumeration and compares
/// with `2^(NT) (C/ε)^|J|`.
pub fn verify_uppcov(
    n: usize,
    t: usize,
    epsilon: &BigRational,
    s: &CylinderTarget,
    j: &IndexSet,
) -> Result<ShiftCoverReport> {
    let words = enumerate_a_j(t, epsilon, s, j, n)?;
    let count = cylinder_count(&words, n * t);
    let bound = uppcov_bound(n, t, epsilon, s, j.len());
    Ok(report(
        ShiftParams {
            n,
            t,
            delta: None,
            epsilon: epsilon.to_string(),
            j: Some(j.elements().to_vec()),
            k: None,
            target: s.to_string(),
            model_constant: s.model_constant(t).to_string(),
        },
        count,
        &bound,
    ))
}

fn check_bowen_order(delta: &BigRational, epsilon: &BigRational) -> Result<()> {
    check_unit_rational("delta", delta, false)?;
    check_unit_rational("epsilon", epsilon, false)?;
    // ε = δ = 1 is the limiting case of ε → 1⁻ at full frequency.
    if !(epsilon < delta || (epsilon.is_one() && delta.is_one())) {
        return domain(format!("need epsilon < delta, got {epsilon} and {delta}"));
    }
    Ok(())
}

/// Counts the depth-`NT` cylinders meeting `A(δ)` by enumeration and
/// compares with `2^(NT) C(N, k) (C/ε)^k`.
pub fn verify_bowen_ball(
    n: usize,
    t: usize,
    delta: &BigRational,
    epsilon: &BigRational,
    s: &CylinderTarget,
) -> Result<ShiftCoverReport> {
    check_bowen_order(delta, epsilon)?;
    let words = enumerate_a(n, t, delta, s)?;
    let count = cylinder_count(&words, n * t);
    let k = min_high_blocks_exact(delta, epsilon, n)?;
    let bound = bowen_bound(n, t, epsilon, s, k);
    Ok(report(
        ShiftParams {
            n,
            t,
            delta: Some(delta.to_string()),
            epsilon: epsilon.to_string(),
            j: None,
            k: Some(k),
            target: s.to_string(),
            model_constant: s.model_constant(t).to_string(),
        },
        count,
        &bound,
    ))
}

/// Markov step: `ν(A_ε(T, S)) ≤ μ(S)/ε`, decided exactly.
pub fn verify_markov(t: usize, epsilon: &BigRational, s: &CylinderTarget) -> Result<MarkovCheck> {
    check_unit_rational("epsilon", epsilon, false)?;
    let len = word_len(1, t, s)?;
    let need = hit_threshold(epsilon, t);
    let count = (0..=low_mask(len))
        .filter(|&b| hits_in(b, s, 0, t) >= need)
        .count();
    let measure = rat(count as i64, 1i64 << len);
    let bound = s.measure() / epsilon;
    Ok(MarkovCheck {
        measure: measure.to_string(),
        bound: bound.to_string(),
        holds: measure <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovCheck {
    pub measure: String,
    pub bound: String,
    pub holds: bool,
}

/// Checks that no cylinder of depth `n + d - 1` meets both
/// `A_(1-α)(n, S)` and `A_ε(n, S^c)` for `α < ε`. Returns the number of
/// cylinders inspected and the number meeting both.
pub fn disjoint_box_check(
    n: usize,
    alpha: &BigRational,
    epsilon: &BigRational,
    s: &CylinderTarget,
) -> Result<SuiteTally> {
    check_unit_rational("alpha", alpha, true)?;
    check_unit_rational("epsilon", epsilon, false)?;
    if alpha >= epsilon {
        return domain(format!("need alpha < epsilon, got {alpha} and {epsilon}"));
    }
    let len = word_len(n, 1, s)?;
    let sc = s.complement();
    let need_s = hit_threshold(&(BigRational::one() - alpha), n);
    let need_c = hit_threshold(epsilon, n);
    let mut tally = SuiteTally::default();
    for b in 0..=low_mask(len) {
        // At this depth the cylinder fixes every window, so it is a single
        // orbit segment for the purpose of both averages.
        let in_s = hits_in(b, s, 0, n) >= need_s;
        let in_c = hits_in(b, &sc, 0, n) >= need_c;
        tally.cases += 1;
        tally.failures += u64::from(in_s && in_c);
    }
    Ok(tally)
}

/// Words of `A(δ)` split by their exact high-block set `{i : a_i ≥ ε}`.
///
/// Counts `#{w ∈ A(δ) : J ⊆ H(w)}` for every `J`, recovers `#{H(w) = J}` by
/// Möbius inversion, and returns `(Σ_J #{H(w) = J}, |A(δ)|)`.
pub fn count_identity(
    n: usize,
    t: usize,
    delta: &BigRational,
    epsilon: &BigRational,
    s: &CylinderTarget,
) -> Result<(u64, u64)> {
    if n > 16 {
        return Err(Error::Budget(format!("N = {n} gives too many index sets")));
    }
    let words = enumerate_a(n, t, delta, s)?;
    let need = hit_threshold(epsilon, t);
    let high = |b: u32| -> usize {
        (0..n)
            .filter(|&i| hits_in(b, s, i * t, (i + 1) * t) >= need)
            .fold(0, |m, i| m | 1 << i)
    };
    let full = 1usize << n;
    let mut superset = vec![0i64; full];
    for w in &words {
        let h = high(w.bits());
        // Every J ⊆ h.
        let mut sub = h;
        loop {
            superset[sub] += 1;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & h;
        }
    }
    let exact: i64 = (0..full)
        .map(|j| {
            let rest = (full - 1) & !j;
            let mut acc = 0i64;
            let mut extra = rest;
            loop {
                let k = j | extra;
                let sign = if extra.count_ones() % 2 == 0 { 1 } else { -1 };
                acc += sign * superset[k];
                if extra == 0 {
                    break;
                }
                extra = (extra - 1) & rest;
            }
            acc
        })
        .sum();
    Ok((exact.max(0) as u64, words.len() as u64))
}

/// Per-`(N, T, S)` cylinder counts for every `J` and threshold, built in one
/// pass over the depth-`NT` cylinders.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHitTable {
    pub n: usize,
    pub t: usize,
    /// For each block threshold `h`: `counts[J]` is the number of depth-`NT`
    /// cylinders meeting `A_J` when "high" means at least `h` hits.
    pub uppcov: Vec<(usize, Vec<u64>)>,
    /// For each total threshold `H`: cylinders meeting `{≥ H hits in [0, NT)}`.
    pub totals: Vec<(usize, u64)>,
}

/// Builds the block-hit table. For each cylinder the admissible `J` form the
/// union of the down-sets of its extensions' high-block masks; the union is
/// counted by inclusion–exclusion over the extensions and a superset-sum
/// transform over `J`.
pub fn block_hit_table(
    n: usize,
    t: usize,
    s: &CylinderTarget,
    block_thresholds: &[usize],
    total_thresholds: &[usize],
) -> Result<BlockHitTable> {
    word_len(n, t, s)?;
    if s.depth() > MAX_SWEEP_DEPTH {
        return Err(Error::Budget(format!(
            "target depth {} exceeds the sweep limit {MAX_SWEEP_DEPTH}",
            s.depth()
        )));
    }
    if n > 20 {
        return Err(Error::Budget(format!("N = {n} gives too many index sets")));
    }
    let nt = n * t;
    let ext_bits = s.depth() - 1;
    let n_prefix: u64 = 1 << nt;
    let n_ext = 1usize << ext_bits;
    let full = 1usize << n;
    let nb = block_thresholds.len();
    let chunk = (n_prefix / 64).max(1 << 10);
    let n_chunks = n_prefix.div_ceil(chunk);

    let (hist, totals) = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![vec![0i64; full]; nb];
            let mut totals = vec![0u64; total_thresholds.len()];
            let mut blocks = vec![0usize; n];
            for p in c * chunk..((c + 1) * chunk).min(n_prefix) {
                let mut best_total = 0;
                let mut ext_masks: Vec<Vec<usize>> = vec![Vec::with_capacity(n_ext); nb];
                for e in 0..n_ext {
                    let w = (p as u32) | ((e as u32) << nt);
                    for (i, b) in blocks.iter_mut().enumerate() {
                        *b = hits_in(w, s, i * t, (i + 1) * t);
                    }
                    best_total = best_total.max(blocks.iter().sum::<usize>());
                    for (ti, &h) in block_thresholds.iter().enumerate() {
                        let mask = blocks
                            .iter()
                            .enumerate()
                            .filter(|(_, &b)| b >= h)
                            .fold(0usize, |m, (i, _)| m | 1 << i);
                        ext_masks[ti].push(mask);
                    }
                }
                for (ti, ms) in ext_masks.iter_mut().enumerate() {
                    add_downset_union(&mut hist[ti], ms);
                }
                for (k, &h) in total_thresholds.iter().enumerate() {
                    totals[k] += u64::from(best_total >= h);
                }
            }
            (hist, totals)
        })
        .reduce(
            || {
                (
                    vec![vec![0i64; full]; nb],
                    vec![0u64; total_thresholds.len()],
                )
            },
            |(mut ha, mut ta), (hb, tb)| {
                for (x, y) in ha.iter_mut().zip(hb) {
                    for (a, b) in x.iter_mut().zip(y) {
                        *a += b;
                    }
                }
                for (a, b) in ta.iter_mut().zip(tb) {
                    *a += b;
                }
                (ha, ta)
            },
        );

    let uppcov = block_thresholds
        .iter()
        .zip(hist)
        .map(|(&h, mut g)| {
            superset_sum(&mut g, n);
            (h, g.into_iter().map(|v| v.max(0) as u64).collect())
        })
        .collect();
    Ok(BlockHitTable {
        n,
        t,
        uppcov,
        totals: total_thresholds.iter().copied().zip(totals).collect(),
    })
}

/// Adds the indicator of `⋃_e {J ⊆ m_e}` to a histogram that will later be
/// superset-summed: the union becomes a signed sum over intersections of the
/// maximal masks.
fn add_downset_union(hist: &mut [i64], masks: &mut Vec<usize>) {
    masks.sort_unstable();
    masks.dedup();
    let maximal: Vec<usize> = masks
        .iter()
        .copied()
        .filter(|&m| !masks.iter().any(|&o| o != m && o & m == m))
        .collect();
    let k = maximal.len();
    for sub in 1u32..1 << k {
        let and = (0..k)
            .filter(|i| sub >> i & 1 == 1)
            .fold(usize::MAX, |a, i| a & maximal[i]);
        hist[and] += if sub.count_ones() % 2 == 1 { 1 } else { -1 };
    }
}

/// In place: `g[J] ← Σ_{M ⊇ J} g[M]`.
fn superset_sum(g: &mut [i64], n: usize) {
    for bit in 0..n {
        for j in 0..g.len() {
            if j >> bit & 1 == 0 {
                g[j] += g[j | 1 << bit];
            }
        }
    }
}

/// Exhaustive sweep of the shift-model checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSweepConfig {
    pub max_n: usize,
    pub max_t: usize,
    /// Cap on `N·T`.
    pub max_nt: usize,
    pub depths: Vec<usize>,
    pub deltas: Vec<BigRational>,
    pub epsilons: Vec<BigRational>,
    /// Cap on `N·T` for the disjoint-box check.
    pub disjoint_max_nt: usize,
    /// Cap on `N` for the count identity.
    pub identity_max_n: usize,
}

impl Default for ShiftSweepConfig {
    fn default() -> Self {
        ShiftSweepConfig {
            max_n: 5,
            max_t: 4,
            max_nt: 20,
            depths: vec![1, 2],
            deltas: (1..=4).map(|i| rat(i, 4)).collect(),
            epsilons: (1..=4).map(|i| rat(i, 5)).collect(),
            disjoint_max_nt: 12,
            identity_max_n: 4,
        }
    }
}

/// Aggregate outcome of [`shift_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSweepSummary {
    pub targets: usize,
    pub uppcov: SuiteTally,
    pub bowen_ball: SuiteTally,
    pub markov: SuiteTally,
    pub disjoint_box: SuiteTally,
    pub count_identity: SuiteTally,
    /// Instances where the `A(δ)` count increased with `δ`.
    pub monotonicity: SuiteTally,
    pub max_ratio_uppcov: f64,
    pub max_ratio_bowen_ball: f64,
    /// The first few failing reports, if any.
    pub failures: Vec<ShiftCoverReport>,
}

impl ShiftSweepSummary {
    pub fn instances(&self) -> u64 {
        self.uppcov.cases + self.bowen_ball.cases + self.markov.cases
    }

    pub fn passed(&self) -> bool {
        [
            self.uppcov,
            self.bowen_ball,
            self.markov,
            self.disjoint_box,
            self.count_identity,
            self.monotonicity,
        ]
        .iter()
        .all(SuiteTally::passed)
    }
}

struct CellOutcome {
    uppcov: SuiteTally,
    bowen: SuiteTally,
    monotone: SuiteTally,
    max_u: f64,
    max_b: f64,
    failures: Vec<ShiftCoverReport>,
}

fn sweep_cell(
    n: usize,
    t: usize,
    s: &CylinderTarget,
    cfg: &ShiftSweepConfig,
) -> Result<CellOutcome> {
    let block_th: Vec<usize> = cfg.epsilons.iter().map(|e| hit_threshold(e, t)).collect();
    let total_th: Vec<usize> = cfg.deltas.iter().map(|d| hit_threshold(d, n * t)).collect();
    let table = block_hit_table(n, t, s, &block_th, &total_th)?;
    let mut out = CellOutcome {
        uppcov: SuiteTally::default(),
        bowen: SuiteTally::default(),
        monotone: SuiteTally::default(),
        max_u: 0.0,
        max_b: 0.0,
        failures: Vec::new(),
    };
    let params =
        |delta: Option<&BigRational>, eps: &BigRational, j: Option<Vec<usize>>, k| ShiftParams {
            n,
            t,
            delta: delta.map(ToString::to_string),
            epsilon: eps.to_string(),
            j,
            k,
            target: s.to_string(),
            model_constant: s.model_constant(t).to_string(),
        };
    for (eps, (_, counts)) in cfg.epsilons.iter().zip(&table.uppcov) {
        let bounds: Vec<BigRational> = (0..=n).map(|k| uppcov_bound(n, t, eps, s, k)).collect();
        for (j, &count) in counts.iter().enumerate() {
            let size = j.count_ones() as usize;
            let r = report(
                params(
                    None,
                    eps,
                    Some(IndexSet::from_mask(n, j as u64).elements().to_vec()),
                    None,
                ),
                count,
                &bounds[size],
            );
            out.uppcov.cases += 1;
            out.max_u = out.max_u.max(r.ratio);
            if !r.verified {
                out.uppcov.failures += 1;
                out.failures.push(r);
            }
        }
    }
    for (delta, &(_, count)) in cfg.deltas.iter().zip(&table.totals) {
        for eps in &cfg.epsilons {
            if check_bowen_order(delta, eps).is_err() {
                continue;
            }
            let k = min_high_blocks_exact(delta, eps, n)?;
            let r = report(
                params(Some(delta), eps, None, Some(k)),
                count,
                &bowen_bound(n, t, eps, s, k),
            );
            out.bowen.cases += 1;
            out.max_b = out.max_b.max(r.ratio);
            if !r.verified {
                out.bowen.failures += 1;
                out.failures.push(r);
            }
        }
    }
    let mut by_delta: Vec<(&BigRational, u64)> = cfg
        .deltas
        .iter()
        .zip(table.totals.iter().map(|x| x.1))
        .collect();
    by_delta.sort_by(|a, b| a.0.cmp(b.0));
    for w in by_delta.windows(2) {
        out.monotone.cases += 1;
        out.monotone.failures += u64::from(w[1].1 > w[0].1);
    }
    Ok(out)
}

/// Runs every shift-model check over all targets of the configured depths
/// and all admissible `(N, T)`.
pub fn shift_sweep(cfg: &ShiftSweepConfig) -> Result<ShiftSweepSummary> {
    let targets: Vec<CylinderTarget> = cfg
        .depths
        .iter()
        .map(|&d| CylinderTarget::all_of_depth(d))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut cells = Vec::new();
    for (si, s) in targets.iter().enumerate() {
        for n in 1..=cfg.max_n {
            for t in 1..=cfg.max_t {
                if n * t <= cfg.max_nt && n * t + s.depth() - 1 <= MAX_WORD_LEN {
                    cells.push((si, n, t));
                }
            }
        }
    }
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(si, n, t)| sweep_cell(n, t, &targets[si], cfg))
        .collect::<Result<_>>()?;

    let mut summary = ShiftSweepSummary {
        targets: targets.len(),
        uppcov: SuiteTally::default(),
        bowen_ball: SuiteTally::default(),
        markov: SuiteTally::default(),
        disjoint_box: SuiteTally::default(),
        count_identity: SuiteTally::default(),
        monotonicity: SuiteTally::default(),
        max_ratio_uppcov: 0.0,
        max_ratio_bowen_ball: 0.0,
        failures: Vec::new(),
    };
    for o in outcomes {
        summary.uppcov = summary.uppcov.merge(o.uppcov);
        summary.bowen_ball = summary.bowen_ball.merge(o.bowen);
        summary.monotonicity = summary.monotonicity.merge(o.monotone);
        summary.max_ratio_uppcov = summary.max_ratio_uppcov.max(o.max_u);
        summary.max_ratio_bowen_ball = summary.max_ratio_bowen_ball.max(o.max_b);
        summary.failures.extend(o.failures.into_iter().take(4));
    }
    summary.failures.truncate(16);

    for s in &targets {
        for t in 1..=cfg.max_t.min(cfg.max_nt) {
            for eps in &cfg.epsilons {
                summary.markov.cases += 1;
                summary.markov.failures += u64::from(!verify_markov(t, eps, s)?.holds);
            }
        }
        for nt in 1..=cfg.disjoint_max_nt.min(cfg.max_nt) {
            for alpha in std::iter::once(BigRational::zero()).chain(cfg.epsilons.iter().cloned()) {
                for eps in &cfg.epsilons {
                    if &alpha >= eps {
                        continue;
                    }
                    summary.disjoint_box = summary
                        .disjoint_box
                        .merge(disjoint_box_check(nt, &alpha, eps, s)?);
                }
            }
        }
        for n in 1..=cfg.identity_max_n.min(cfg.max_n) {
            for t in 1..=cfg.max_t {
                if n * t > cfg.max_nt.min(12) {
                    continue;
                }
                for delta in &cfg.deltas {
                    for eps in &cfg.epsilons {
                        let (sum, direct) = count_identity(n, t, delta, eps, s)?;
                        summary.count_identity.cases += 1;
                        summary.count_identity.failures += u64::from(sum != direct);
                    }
                }
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> SymbolWord {
        s.parse().unwrap()
    }

    fn target(words: &[&str]) -> CylinderTarget {
        let d = words.first().map_or(1, |x| x.len());
        CylinderTarget::new(d, words.iter().map(|x| w(x))).unwrap()
    }

    #[test]
    fn words_round_trip_through_text() {
        for s in ["", "0", "1", "1010", "110000000000000000000000000001"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!(matches!("102".parse::<SymbolWord>(), Err(Error::Parse(_))));
        assert!(matches!(
            "0".repeat(31).parse::<SymbolWord>(),
            Err(Error::Budget(_))
        ));
        assert_eq!(w("10").bits(), 1);
    }

    #[test]
    fn target_text_format() {
        let t = CylinderTarget::parse("# comment\n01\n\n11\n").unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.measure(), rat(1, 2));
        assert!(CylinderTarget::parse("01\n1\n").is_err());
        let empty = CylinderTarget::parse("# nothing\n").unwrap();
        assert_eq!((empty.depth(), empty.len()), (1, 0));
        assert_eq!(CylinderTarget::all_of_depth(2).unwrap().len(), 16);
    }

    #[test]
    fn block_average_examples() {
        let one = target(&["1"]);
        assert_eq!(block_average(&w("1111"), &one, 4, 1).unwrap(), rat(1, 1));
        assert_eq!(block_average(&w("1010"), &one, 4, 1).unwrap(), rat(1, 2));
        let s11 = target(&["11"]);
        assert_eq!(block_average(&w("1100"), &s11, 3, 1).unwrap(), rat(1, 3));
        assert!(block_average(&w("110"), &s11, 3, 1).is_err());
    }

    #[test]
    fn enumerate_a_examples() {
        let one = target(&["1"]);
        let a = enumerate_a(1, 4, &rat(1, 1), &one).unwrap();
        assert_eq!(a, vec![w("1111")]);
        assert_eq!(enumerate_a(2, 2, &rat(1, 2), &one).unwrap().len(), 11);
        assert!(enumerate_a(2, 2, &rat(1, 4), &target(&[]))
            .unwrap()
            .is_empty());
        assert!(matches!(
            enumerate_a(8, 4, &rat(1, 2), &one),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn enumerate_a_j_examples() {
        let one = target(&["1"]);
        let both = IndexSet::new(2, vec![1, 2]).unwrap();
        assert_eq!(
            enumerate_a_j(2, &rat(1, 2), &one, &both, 2).unwrap().len(),
            9
        );
        let none = IndexSet::new(2, vec![]).unwrap();
        assert_eq!(
            enumerate_a_j(2, &rat(1, 2), &one, &none, 2).unwrap().len(),
            16
        );
    }

    #[test]
    fn uppcov_examples() {
        let one = target(&["1"]);
        let both = IndexSet::new(2, vec![1, 2]).unwrap();
        let r = verify_uppcov(2, 2, &rat(1, 2), &one, &both).unwrap();
        assert_eq!((r.exact_count, r.bound), (9, 64.0));
        assert!(r.verified);
        assert_eq!(r.params.model_constant, "1");
        let none = IndexSet::new(3, vec![]).unwrap();
        let r = verify_uppcov(3, 2, &rat(1, 2), &one, &none).unwrap();
        assert_eq!((r.exact_count, r.bound, r.ratio), (64, 64.0, 1.0));
        let r = verify_uppcov(1, 4, &rat(1, 1), &one, &IndexSet::new(1, vec![1]).unwrap()).unwrap();
        assert_eq!((r.exact_count, r.bound), (1, 12.0));
    }

    #[test]
    fn bowen_ball_examples() {
        let one = target(&["1"]);
        let r = verify_bowen_ball(2, 2, &rat(3, 4), &rat(1, 2), &one).unwrap();
        assert_eq!(r.params.k, Some(1));
        assert_eq!((r.exact_count, r.bound), (5, 64.0));
        assert!(r.verified);
        let r = verify_bowen_ball(2, 4, &rat(1, 1), &rat(1, 1), &one).unwrap();
        assert_eq!(r.exact_count, 1);
        assert!(r.verified);
        assert!(verify_bowen_ball(2, 2, &rat(1, 2), &rat(3, 4), &one).is_err());
    }

    #[test]
    fn markov_examples() {
        let one = target(&["1"]);
        let m = verify_markov(4, &rat(1, 2), &one).unwrap();
        assert_eq!(
            (m.measure.as_str(), m.bound.as_str(), m.holds),
            ("11/16", "1", true)
        );
        let m = verify_markov(4, &rat(1, 1), &one).unwrap();
        assert_eq!((m.measure.as_str(), m.bound.as_str()), ("1/16", "1/2"));
        let all = target(&["0", "1"]);
        let m = verify_markov(3, &rat(2, 5), &all).unwrap();
        assert_eq!((m.measure.as_str(), m.bound.as_str()), ("1", "5/2"));
    }

    #[test]
    fn table_matches_direct_enumeration() {
        let eps: Vec<BigRational> = (1..=4).map(|i| rat(i, 5)).collect();
        let deltas: Vec<BigRational> = (1..=4).map(|i| rat(i, 4)).collect();
        for s in CylinderTarget::all_of_depth(2).unwrap().iter().step_by(3) {
            for (n, t) in [(1, 3), (2, 2), (3, 2), (2, 3)] {
                let bt: Vec<usize> = eps.iter().map(|e| hit_threshold(e, t)).collect();
                let tt: Vec<usize> = deltas.iter().map(|d| hit_threshold(d, n * t)).collect();
                let table = block_hit_table(n, t, s, &bt, &tt).unwrap();
                for (e, (_, counts)) in eps.iter().zip(&table.uppcov) {
                    for (mask, &c) in counts.iter().enumerate() {
                        let j = IndexSet::from_mask(n, mask as u64);
                        let words = enumerate_a_j(t, e, s, &j, n).unwrap();
                        assert_eq!(c, cylinder_count(&words, n * t), "{s} n={n} t={t} J={mask}");
                    }
                }
                for (d, &(_, c)) in deltas.iter().zip(&table.totals) {
                    let words = enumerate_a(n, t, d, s).unwrap();
                    assert_eq!(c, cylinder_count(&words, n * t));
                }
            }
        }
    }

    #[test]
    fn enumeration_is_monotone_in_j() {
        let s = target(&["01", "11"]);
        let small = IndexSet::new(3, vec![2]).unwrap();
        let big = IndexSet::new(3, vec![1, 2]).unwrap();
        let a: BTreeSet<_> = enumerate_a_j(2, &rat(1, 2), &s, &big, 3)
            .unwrap()
            .into_iter()
            .collect();
        let b: BTreeSet<_> = enumerate_a_j(2, &rat(1, 2), &s, &small, 3)
            .unwrap()
            .into_iter()
            .collect();
        assert!(a.is_subset(&b));
    }

    #[test]
    fn count_identity_and_disjoint_boxes() {
        let s = target(&["10", "11"]);
        let (sum, direct) = count_identity(3, 2, &rat(1, 2), &rat(1, 2), &s).unwrap();
        assert_eq!(sum, direct);
        let t = disjoint_box_check(6, &rat(1, 5), &rat(2, 5), &s).unwrap();
        assert_eq!((t.cases, t.failures), (128, 0));
    }

    #[test]
    fn small_sweep_passes() {
        let cfg = ShiftSweepConfig {
            max_n: 3,
            max_t: 3,
            max_nt: 9,
            ..Default::default()
        };
        let summary = shift_sweep(&cfg).unwrap();
        assert!(summary.passed(), "{:?}", summary.failures);
        assert!(summary.instances() > 500);
        assert!(summary.max_ratio_uppcov <= 1.0);
    }
}
