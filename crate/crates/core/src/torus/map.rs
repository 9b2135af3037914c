use serde::{Deserialize, Serialize};

use crate::bound::SystemConstants;
use crate::error::{domain, Result};

/// A point of the torus `ℝ²/ℤ²`, coordinates in `[0, 1)`.
pub type Point = [f64; 2];

/// Reduces a real to `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

pub fn wrap_point(p: Point) -> Point {
    [wrap(p[0]), wrap(p[1])]
}

/// Sup-metric distance on the torus.
pub fn torus_distance(a: Point, b: Point) -> f64 {
    let d = |x: f64, y: f64| {
        let t = wrap(x - y);
        t.min(1.0 - t)
    };
    d(a[0], b[0]).max(d(a[1], b[1]))
}

/// A hyperbolic element of `SL(2, ℤ)` acting on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicMap {
    pub m: [[i64; 2]; 2],
    /// Eigenvalue of modulus greater than one (negative when the trace is).
    pub eigenvalue: f64,
    /// `|eigenvalue|`.
    pub lambda_u: f64,
    pub u_dir: [f64; 2],
    pub s_dir: [f64; 2],
}

fn eigenvector(m: &[[i64; 2]; 2], mu: f64) -> [f64; 2] {
    let [[a, b], [c, d]] = *m;
    let v = if b != 0 {
        [b as f64, mu - a as f64]
    } else {
        [mu - d as f64, c as f64]
    };
    let norm = v[0].hypot(v[1]);
    let v = [v[0] / norm, v[1] / norm];
    let flip = if v[0] != 0.0 { v[0] < 0.0 } else { v[1] < 0.0 };
    if flip {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Eigen-data of `m`; requires `det m = 1` and `|tr m| > 2`.
pub fn eigen_data(m: [[i64; 2]; 2]) -> Result<HyperbolicMap> {
    let [[a, b], [c, d]] = m;
    let det = a * d - b * c;
    if det != 1 {
        return domain(format!("determinant {det} is not 1"));
    }
    let tr = a + d;
    if tr.abs() <= 2 {
        return domain(format!("trace {tr} gives a non-hyperbolic map"));
    }
    let tr = tr as f64;
    let root = (tr * tr - 4.0).sqrt();
    let eigenvalue = (tr + tr.signum() * root) / 2.0;
    let stable = 1.0 / eigenvalue;
    Ok(HyperbolicMap {
        m,
        eigenvalue,
        lambda_u: eigenvalue.abs(),
        u_dir: eigenvector(&m, eigenvalue),
        s_dir: eigenvector(&m, stable),
    })
}

impl HyperbolicMap {
    pub fn cat() -> Self {
        eigen_data([[2, 1], [1, 1]]).expect("the cat map is hyperbolic")
    }

    pub fn ln_lambda(&self) -> f64 {
        self.lambda_u.ln()
    }

    pub fn apply(&self, p: Point) -> Point {
        let [[a, b], [c, d]] = self.m;
        wrap_point([
            a as f64 * p[0] + b as f64 * p[1],
            c as f64 * p[0] + d as f64 * p[1],
        ])
    }

    /// The orbit `x, Mx, …, M^(n-1) x`.
    pub fn orbit(&self, x: Point, n: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n);
        let mut p = wrap_point(x);
        for _ in 0..n {
            out.push(p);
            p = self.apply(p);
        }
        out
    }

    /// `M^t (h u)`: displacement along the unstable line after `t` steps.
    pub fn unstable_step(&self, t: usize) -> [f64; 2] {
        let s = self.eigenvalue.powi(t as i32);
        [s * self.u_dir[0], s * self.u_dir[1]]
    }

    /// Model constants for this map: `λ_min = λ_max = η = ln λ_u`, `L = 1`,
    /// `c0 = 2`, `C1 = c1 = c2 = t1 = 1`.
    pub fn constants(&self, lambda_prime: f64) -> SystemConstants {
        let l = self.ln_lambda();
        SystemConstants {
            lambda_min: l,
            lambda_max: l,
            eta: l,
            ..SystemConstants::catmap(lambda_prime)
        }
    }
}
