//! Closed-form evaluation of the codimension bound for sets of points whose
//! orbits escape an open set `O` on average.
//!
//! The chain of quantities is
//!
//! ```text
//! φ(y, s)   = (1-s)·ln(1/(1-y/2)) - 2(1-s)·ln(1/(1-s)) - s·ln((1+y/4)/s)
//! B(z)      = (1/z)^z · (1/(1-z))^(1-z)
//! C(T)      = 1 - y + (T_r + 1)/T + c0·e^(-λ_min T)
//! dim ≤ L + 1/(λ_max T) · ln[ (C(1-z)/(z(δ-z)))^z · ((1 + c0 e^(-λ_min T))/(1-z))^(1-z) ]
//! ```
//!
//! where `y` is the measure of the inner `5r`-core of `O`, `δ` the escape
//! frequency and `s = √(1-δ)`. Choosing `z = 1 - s` and the time
//! `T = max(8 T_r / y, T_0)` turns the bracket into `φ(y, s)`, so the
//! certified codimension is `φ(y, s) / (λ_max T)` whenever that is positive.
//!
//! Every function here is pure; all reals are `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::{bisect, sign_change_brackets, xlog_inv};

/// Number of interior scan points used to bracket roots of `s ↦ φ(y, s)`.
pub const THRESHOLD_SCAN_POINTS: usize = 1024;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        domain(format!("{name} = {v} is outside [0, 1]"))
    }
}

/// The rate function `φ(y, s)` on the unit square.
///
/// Uses `0·ln(1/0) = 0`, so `φ(y, 0) = ln(1/(1-y/2))` and
/// `φ(y, 1) = -ln(1+y/4)`.
pub fn phi(y: f64, s: f64) -> Result<f64> {
    check_unit("y", y)?;
    check_unit("s", s)?;
    let core_term = (1.0 - s) * (1.0 / (1.0 - y / 2.0)).ln();
    let entropy_term = 2.0 * xlog_inv(1.0 - s);
    let tail_term = if s == 0.0 {
        0.0
    } else {
        s * ((1.0 + y / 4.0) / s).ln()
    };
    Ok(core_term - entropy_term - tail_term)
}

/// The binary-entropy base `B(z) = (1/z)^z (1/(1-z))^(1-z)`, equal to `1`
/// at both endpoints.
pub fn b_of_z(z: f64) -> Result<f64> {
    check_unit("z", z)?;
    Ok((xlog_inv(z) + xlog_inv(1.0 - z)).exp())
}

/// Escape-frequency threshold above which a dimension drop is certified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaThreshold {
    /// `inf{δ : φ(y, √(1-δ)) > 0}`, or `1` when no drop is possible.
    pub delta_o: f64,
    pub drop_possible: bool,
    /// The root `s_0` of `φ(y, ·)` that produced `delta_o`.
    pub root_s: Option<f64>,
    /// Number of sign changes seen on the scan.
    pub sign_changes: usize,
    /// Set when more than one sign change was found; the largest is used.
    pub ambiguous: bool,
}

/// Computes `δ_O` for an open set of measure `y` to accuracy `tol`.
///
/// Scans `s ↦ φ(y, s)` on 1024 interior points of `(0, 1)`, takes the
/// largest sign-change bracket and bisects it. Since `δ = 1 - s²` reverses
/// order, the largest root in `s` is the infimum in `δ`.
pub fn delta_threshold(y: f64, tol: f64) -> Result<DeltaThreshold> {
    if !(y > 0.0 && y <= 1.0) {
        return domain(format!("y = {y} must lie in (0, 1]"));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return domain(format!("tol = {tol} must lie in (0, 1e-3]"));
    }
    let f = |s: f64| phi(y, s).expect("scan stays inside the unit square");
    let n = THRESHOLD_SCAN_POINTS;
    let samples: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let any_positive = samples.iter().any(|&s| f(s) > 0.0);
    let brackets = sign_change_brackets(f, &samples);
    let Some(&(a, b)) = brackets.last().filter(|_| any_positive) else {
        return Ok(DeltaThreshold {
            delta_o: 1.0,
            drop_possible: false,
            root_s: None,
            sign_changes: brackets.len(),
            ambiguous: brackets.len() > 1,
        });
    };
    // δ = 1 - s², so |dδ| ≤ 2|ds|; halve the tolerance in s.
    let (lo, hi) = bisect(f, a, b, tol / 2.0);
    let root = 0.5 * (lo + hi);
    Ok(DeltaThreshold {
        delta_o: 1.0 - root * root,
        drop_possible: true,
        root_s: Some(root),
        sign_changes: brackets.len(),
        ambiguous: brackets.len() > 1,
    })
}

/// Dynamical constants of a model system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants", into = "RawConstants")]
pub struct SystemConstants {
    /// Smallest eigenvalue exponent of the time-one conjugation on `Lie(P)`.
    pub lambda_min: f64,
    /// Largest eigenvalue exponent.
    pub lambda_max: f64,
    /// Trace exponent: Bowen boxes shrink in volume like `e^(-η t)`.
    pub eta: f64,
    /// `L = dim P`.
    pub dim_p: u32,
    /// Boundary overlap constant of the tile count.
    pub c0: f64,
    /// Ball-covering constant of a Bowen box (`C1`).
    pub ball_cover: f64,
    /// Lower Radon–Nikodym bound between Haar and Lebesgue measure.
    pub c1: f64,
    /// Upper Radon–Nikodym bound.
    pub c2: f64,
    /// Equidistribution onset time.
    pub t1: f64,
    /// Equidistribution rate.
    pub lambda_prime: f64,
    /// Radius on which `exp` is 2-bi-Lipschitz.
    pub r_prime: f64,
    /// Injectivity radius of the space.
    pub r0: f64,
    pub r1: f64,
}

/// Serialized form; `r2` is optional on input and always written on output.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawConstants {
    lambda_min: f64,
    lambda_max: f64,
    eta: f64,
    #[serde(rename = "L")]
    dim_p: u32,
    c0: f64,
    #[serde(rename = "C1")]
    ball_cover: f64,
    c1: f64,
    c2: f64,
    t1: f64,
    lambda_prime: f64,
    r_prime: f64,
    r0: f64,
    r1: f64,
    #[serde(default)]
    r2: Option<f64>,
}

impl TryFrom<RawConstants> for SystemConstants {
    type Error = Error;

    fn try_from(raw: RawConstants) -> Result<Self> {
        let k = SystemConstants {
            lambda_min: raw.lambda_min,
            lambda_max: raw.lambda_max,
            eta: raw.eta,
            dim_p: raw.dim_p,
            c0: raw.c0,
            ball_cover: raw.ball_cover,
            c1: raw.c1,
            c2: raw.c2,
            t1: raw.t1,
            lambda_prime: raw.lambda_prime,
            r_prime: raw.r_prime,
            r0: raw.r0,
            r1: raw.r1,
        };
        k.validate()?;
        if let Some(r2) = raw.r2 {
            if (r2 - k.r2()).abs() > 1e-12 * k.r2().max(1.0) {
                return domain(format!(
                    "r2 = {r2} disagrees with min(r0, r_prime)/2 = {}",
                    k.r2()
                ));
            }
        }
        Ok(k)
    }
}

impl From<SystemConstants> for RawConstants {
    fn from(k: SystemConstants) -> Self {
        RawConstants {
            lambda_min: k.lambda_min,
            lambda_max: k.lambda_max,
            eta: k.eta,
            dim_p: k.dim_p,
            c0: k.c0,
            ball_cover: k.ball_cover,
            c1: k.c1,
            c2: k.c2,
            t1: k.t1,
            lambda_prime: k.lambda_prime,
            r_prime: k.r_prime,
            r0: k.r0,
            r1: k.r1,
            r2: Some(k.r2()),
        }
    }
}

impl SystemConstants {
    /// Full binary shift: depth-`t` cylinders are exact Bowen boxes.
    pub fn shift() -> Self {
        let ln2 = std::f64::consts::LN_2;
        SystemConstants {
            lambda_min: ln2,
            lambda_max: ln2,
            eta: ln2,
            dim_p: 1,
            c0: 0.0,
            ball_cover: 1.0,
            c1: 1.0,
            c2: 1.0,
            t1: 1.0,
            lambda_prime: ln2,
            r_prime: 1.0,
            r0: 1.0,
            r1: 0.5,
        }
    }

    /// Cat map `[[2,1],[1,1]]` on the 2-torus with sup metric, with the
    /// equidistribution rate supplied by the caller (usually fitted).
    pub fn catmap(lambda_prime: f64) -> Self {
        let ln_lu = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        SystemConstants {
            lambda_min: ln_lu,
            lambda_max: ln_lu,
            eta: ln_lu,
            dim_p: 1,
            c0: 2.0,
            ball_cover: 1.0,
            c1: 1.0,
            c2: 1.0,
            t1: 1.0,
            lambda_prime,
            r_prime: 0.5,
            r0: 0.5,
            r1: 0.25,
        }
    }

    /// `r2 = min(r0, r')/2`, the largest admissible box radius.
    pub fn r2(&self) -> f64 {
        0.5 * self.r0.min(self.r_prime)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_min", self.lambda_min),
            ("lambda_max", self.lambda_max),
            ("eta", self.eta),
            ("c1", self.c1),
            ("c2", self.c2),
            ("lambda_prime", self.lambda_prime),
            ("r_prime", self.r_prime),
            ("r0", self.r0),
            ("r1", self.r1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} = {v} must be positive and finite"));
            }
        }
        if self.dim_p == 0 {
            return domain("L must be a positive integer");
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return domain(format!("c0 = {} must be non-negative", self.c0));
        }
        if !(self.ball_cover >= 1.0) {
            return domain(format!("C1 = {} must be at least 1", self.ball_cover));
        }
        if !(self.t1 >= 1.0) {
            return domain(format!("t1 = {} must be at least 1", self.t1));
        }
        if self.lambda_min > self.lambda_max {
            return domain("lambda_min exceeds lambda_max");
        }
        if self.c1 > self.c2 {
            return domain("c1 exceeds c2");
        }
        Ok(())
    }
}

/// Scalar inputs of the bound chain and the quantities derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeParameters {
    /// Measure of the relevant inner core of `O`.
    pub y: f64,
    pub delta: f64,
    /// `√(1-δ)`.
    pub s: f64,
    /// Optimal block fraction `1 - s`; absent at `δ = 1`.
    pub z: Option<f64>,
    /// Per-block threshold `(δ - z)/(1 - z)`; absent at `δ = 1`.
    pub epsilon: Option<f64>,
    pub r: f64,
}

impl EscapeParameters {
    pub fn new(y: f64, delta: f64, r: f64, k: &SystemConstants) -> Result<Self> {
        check_unit("y", y)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return domain(format!("delta = {delta} must lie in (0, 1]"));
        }
        if !(r > 0.0 && r <= k.r2()) {
            return domain(format!("r = {r} must lie in (0, r2 = {}]", k.r2()));
        }
        let (z, epsilon) = if delta < 1.0 {
            let z = z_star(delta)?.z;
            (Some(z), Some(epsilon_from_z(z, delta)?))
        } else {
            (None, None)
        };
        Ok(EscapeParameters {
            y,
            delta,
            s: (1.0 - delta).sqrt(),
            z,
            epsilon,
            r,
        })
    }
}

/// Times controlling the covering construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSchedule {
    /// Burn-in after which translates equidistribute.
    pub t_r: f64,
    /// Time after which `c0·e^(-λ_min T) < 1/T` holds for good.
    pub t0: f64,
    /// Block length used by the bound.
    pub t: f64,
    /// Number of blocks; the asymptotic bound uses `N → ∞`.
    pub blocks: u64,
}

/// `C(T) = 1 - y + (T_r + 1)/T + c0·e^(-λ_min T)`.
pub fn c_of_t(t: f64, y5r: f64, sched: &TimeSchedule, k: &SystemConstants) -> Result<f64> {
    check_unit("y5r", y5r)?;
    if !(t > sched.t_r) {
        return Err(Error::Schedule { t, t_r: sched.t_r });
    }
    Ok(1.0 - y5r + (sched.t_r + 1.0) / t + k.c0 * (-k.lambda_min * t).exp())
}

/// Burn-in time `T_r` for box radius `r`.
pub fn burn_in(r: f64, k: &SystemConstants) -> f64 {
    let l = k.dim_p as f64;
    let lp = k.lambda_prime;
    let volume_term = (l * (4.0 * l.sqrt()).ln() - (k.c1 * lp).ln() - l * r.ln()) / lp;
    k.t1.max((2.0 / r).ln() / lp)
        .max(volume_term)
        .max(8f64.ln() / k.lambda_min)
}

/// Smallest `T0 ≥ 1` such that `c0·e^(-λ T) < 1/T` for every `T ≥ T0`.
pub fn onset_time(c0: f64, lambda_min: f64) -> f64 {
    if c0 == 0.0 {
        return 1.0;
    }
    // g(T) = ln(c0 T) - λT is concave with its peak at T = 1/λ; the
    // condition is g < 0.
    let g = |t: f64| (c0 * t).ln() - lambda_min * t;
    let peak = (1.0 / lambda_min).max(1.0);
    if g(peak) < 0.0 {
        return 1.0;
    }
    let mut hi = 2.0 * peak;
    while g(hi) >= 0.0 {
        hi *= 2.0;
    }
    // Keep the endpoint on the side where the condition holds strictly.
    let (_, hi) = bisect(|t| -g(t), peak, hi, 1e-12 * hi);
    hi
}

/// Builds `T_r`, `T0` and `T = max(8 T_r / y, T0)`.
pub fn schedule(r: f64, y5r: f64, k: &SystemConstants) -> Result<TimeSchedule> {
    k.validate()?;
    if !(r > 0.0 && r <= k.r2()) {
        return domain(format!("r = {r} must lie in (0, r2 = {}]", k.r2()));
    }
    if !(y5r > 0.0 && y5r <= 1.0) {
        return domain(format!("y5r = {y5r} must lie in (0, 1]"));
    }
    let t_r = burn_in(r, k);
    let t0 = onset_time(k.c0, k.lambda_min);
    Ok(TimeSchedule {
        t_r,
        t0,
        t: (8.0 * t_r / y5r).max(t0),
        blocks: 1,
    })
}

/// Maximiser of `z(δ-z)/(1-z)` over `(0, δ)` and the maximum itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZStar {
    pub z: f64,
    pub ratio_max: f64,
}

pub fn z_star(delta: f64) -> Result<ZStar> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta = {delta} must lie in (0, 1)"));
    }
    let z = 1.0 - (1.0 - delta).sqrt();
    Ok(ZStar {
        z,
        ratio_max: z * z,
    })
}

/// `ε = (δ - z)/(1 - z)`.
pub fn epsilon_from_z(z: f64, delta: f64) -> Result<f64> {
    if !(0.0 < z && z < delta && delta < 1.0) {
        return domain(format!(
            "need 0 < z < delta < 1, got z = {z}, delta = {delta}"
        ));
    }
    Ok((delta - z) / (1.0 - z))
}

/// `z = 1 - (1-δ)/(1-ε)`, the inverse of [`epsilon_from_z`].
pub fn z_from_epsilon(epsilon: f64, delta: f64) -> Result<f64> {
    if !(0.0 < epsilon && epsilon < delta && delta < 1.0) {
        return domain(format!(
            "need 0 < epsilon < delta < 1, got epsilon = {epsilon}, delta = {delta}"
        ));
    }
    Ok(1.0 - (1.0 - delta) / (1.0 - epsilon))
}

fn check_dim_args(z: f64, delta: f64) -> Result<()> {
    if !(0.0 < z && z < delta && delta <= 1.0) {
        return domain(format!(
            "need 0 < z < delta <= 1, got z = {z}, delta = {delta}"
        ));
    }
    Ok(())
}

/// Upper bound on the Hausdorff dimension for block fraction `z` and block
/// length `T`, in the rearranged form.
pub fn dim_upper(
    z: f64,
    t: f64,
    y5r: f64,
    delta: f64,
    k: &SystemConstants,
    sched: &TimeSchedule,
) -> Result<f64> {
    check_dim_args(z, delta)?;
    let c = c_of_t(t, y5r, sched, k)?;
    let overlap = 1.0 + k.c0 * (-k.lambda_min * t).exp();
    let log_bracket =
        z * (c * (1.0 - z) / (z * (delta - z))).ln() + (1.0 - z) * (overlap / (1.0 - z)).ln();
    Ok(k.dim_p as f64 + log_bracket / (k.lambda_max * t))
}

/// The same bound written through `B(z)`:
/// `L + ln(B(z)·(C(1-z)/(δ-z))^z·(1 + c0 e^(-λ_min T))^(1-z)) / (λ_max T)`.
pub fn dim_upper_entropy_form(
    z: f64,
    t: f64,
    y5r: f64,
    delta: f64,
    k: &SystemConstants,
    sched: &TimeSchedule,
) -> Result<f64> {
    check_dim_args(z, delta)?;
    let c = c_of_t(t, y5r, sched, k)?;
    let overlap = 1.0 + k.c0 * (-k.lambda_min * t).exp();
    let log_bracket =
        b_of_z(z)?.ln() + z * (c * (1.0 - z) / (delta - z)).ln() + (1.0 - z) * overlap.ln();
    Ok(k.dim_p as f64 + log_bracket / (k.lambda_max * t))
}

/// All intermediate and final values of one bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: EscapeParameters,
    pub constants: SystemConstants,
    pub schedule: TimeSchedule,
    pub phi_value: f64,
    /// `C(T)` at the scheduled `T`.
    pub c_of_t: f64,
    /// `B(z*)`; `1` at `δ = 1`.
    pub b_of_z: f64,
    /// Dimension bound at `(z*, T)`; absent at `δ = 1` where it diverges.
    pub dim_upper: Option<f64>,
    /// `L - dim_upper`: the optimised expression before the `φ` estimate.
    pub codim_optimized: Option<f64>,
    /// `φ(y, s)/(λ_max T)` without clamping.
    pub codim_signed: f64,
    /// `max(0, codim_signed)`.
    pub codim_lower: f64,
    pub drop_achieved: bool,
    /// `δ_O` for the same `y`, for context.
    pub threshold: DeltaThreshold,
}

/// Certified codimension lower bound for escape frequency `delta` when the
/// inner `5r`-core of `O` has measure `y5r`.
pub fn codim_lower(r: f64, y5r: f64, delta: f64, k: &SystemConstants) -> Result<BoundReport> {
    k.validate()?;
    let r_max = k.r2() / 5.0;
    if !(r > 0.0 && r <= r_max * (1.0 + 1e-12)) {
        return domain(format!("r = {r} must lie in (0, r2/5 = {r_max}]"));
    }
    let params = EscapeParameters::new(y5r, delta, r, k)?;
    let sched = schedule(r, y5r, k)?;
    let phi_value = phi(y5r, params.s)?;
    let codim_signed = phi_value / (k.lambda_max * sched.t);
    let (dim, b) = match params.z {
        Some(z) => (
            Some(dim_upper(z, sched.t, y5r, delta, k, &sched)?),
            b_of_z(z)?,
        ),
        None => (None, 1.0),
    };
    Ok(BoundReport {
        params,
        constants: *k,
        schedule: sched,
        phi_value,
        c_of_t: c_of_t(sched.t, y5r, &sched, k)?,
        b_of_z: b,
        dim_upper: dim,
        codim_optimized: dim.map(|d| k.dim_p as f64 - d),
        codim_signed,
        codim_lower: codim_signed.max(0.0),
        drop_achieved: phi_value > 0.0,
        threshold: delta_threshold(y5r, 1e-9)?,
    })
}

/// Comparison bounds, each up to a suppressed absolute constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBounds {
    /// Eventual escape: `y / (ln(1/r) + ln(1/y))`.
    pub eventual_escape: f64,
    /// Ball targets: `ρ^dim X / ln(1/ρ)`.
    pub ball: f64,
    /// Escape with frequency one: `y·ln(1/(1-y/2)) / ln(1/r)`.
    pub full_frequency: f64,
}

pub fn reference_bounds(r: f64, y_core: f64, rho: f64, dim_x: u32) -> Result<ReferenceBounds> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("r = {r} must lie in (0, 1)"));
    }
    if !(y_core > 0.0 && y_core <= 1.0) {
        return domain(format!("y_core = {y_core} must lie in (0, 1]"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return domain(format!("rho = {rho} must lie in (0, 1)"));
    }
    if dim_x == 0 {
        return domain("dim X must be positive");
    }
    let log_inv_r = (1.0 / r).ln();
    Ok(ReferenceBounds {
        eventual_escape: y_core / (log_inv_r + (1.0 / y_core).ln()),
        ball: rho.powi(dim_x as i32) / (1.0 / rho).ln(),
        full_frequency: y_core * (1.0 / (1.0 - y_core / 2.0)).ln() / log_inv_r,
    })
}
