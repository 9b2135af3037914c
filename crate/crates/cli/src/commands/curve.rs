use std::fmt::Write as _;
use std::path::PathBuf;

use escape_dim_core::bound::DeltaThreshold;
use escape_dim_core::{delta_threshold, phi, Result};
use serde_json::json;

use super::bound::DEFAULT_TOL;
use super::{csv, json, write_file};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::record::RunRecord;

pub const CURVE_POINTS: usize = 2000;
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: [f64; 4] = [30.0, 30.0, 60.0, 80.0]; // top, right, bottom, left

/// `(δ, φ(μ, √(1-δ)))` on `CURVE_POINTS` evenly spaced `δ ∈ [0, 1]`.
pub fn curve_rows(mu: f64) -> Result<Vec<(f64, f64)>> {
    (0..CURVE_POINTS)
        .map(|i| {
            let delta = i as f64 / (CURVE_POINTS - 1) as f64;
            Ok((delta, phi(mu, (1.0 - delta).sqrt())?))
        })
        .collect()
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

/// An 800×500 line plot of the curve with axes labelled `delta` and `phi`.
/// When a drop is possible the root is drawn as a group with id
/// `root-marker` carrying its abscissa in `data-delta`.
pub fn render_svg(mu: f64, rows: &[(f64, f64)], threshold: &DeltaThreshold) -> String {
    let [top, right, bottom, left] = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let lo = rows.iter().map(|r| r.1).fold(0.0f64, f64::min);
    let hi = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |d: f64| left + d * pw;
    let y = |v: f64| top + (hi - v) / (hi - lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="500" viewBox="0 0 800 500" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="800" height="500" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<title>phi(mu, sqrt(1 - delta)) for mu = {mu}</title>"#
    );
    // Axes and ticks.
    let (x0, x1, y0, y1) = (x(0.0), x(1.0), y(lo), y(hi));
    let _ = writeln!(s, r#"<g id="axes" stroke="black" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="ticks" font-size="11">"#);
    for i in 0..=5 {
        let d = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{y0}" x2="{0}" y2="{1}" stroke="black"/><text x="{0}" y="{2}" text-anchor="middle">{d:.1}</text>"#,
            x(d),
            y0 + 5.0,
            y0 + 20.0
        );
    }
    let step = nice_step(hi - lo);
    let mut v = (lo / step).ceil() * step;
    while v <= hi {
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{x0}" y2="{1}" stroke="black"/><text x="{2}" y="{3}" text-anchor="end">{4}</text>"#,
            x0 - 5.0,
            y(v),
            x0 - 8.0,
            y(v) + 4.0,
            format_tick(v, step)
        );
        v += step;
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text id="x-label" x="{}" y="{}" text-anchor="middle">delta</text>"#,
        left + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text id="y-label" x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">phi</text>"#,
        top + ph / 2.0
    );
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(
            s,
            r##"<line id="zero" x1="{x0}" y1="{0}" x2="{x1}" y2="{0}" stroke="#888" stroke-dasharray="4 3"/>"##,
            y(0.0)
        );
    }
    let mut points = String::new();
    for &(d, v) in rows {
        let _ = write!(points, "{:.2},{:.2} ", x(d), y(v));
    }
    let _ = writeln!(
        s,
        r##"<polyline id="curve" fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##,
        points.trim_end()
    );
    if threshold.drop_possible {
        let d = threshold.delta_o;
        let _ = writeln!(s, r#"<g id="root-marker" data-delta="{d}">"#);
        let _ = writeln!(
            s,
            r##"<line x1="{0}" y1="{y1}" x2="{0}" y2="{y0}" stroke="#d62728" stroke-dasharray="3 3"/>"##,
            x(d)
        );
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="4" fill="#d62728"/>"##,
            x(d),
            y(0.0)
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end" fill="#d62728">delta_O = {d:.4}</text>"##,
            x(d) - 6.0,
            y(0.0) - 8.0
        );
        let _ = writeln!(s, "</g>");
    } else {
        let _ = writeln!(
            s,
            r#"<text id="no-root" x="{}" y="{}">no sign change: no drop certified</text>"#,
            left + 10.0,
            top + 15.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    format!("{v:.digits$}")
}

pub fn curve(cfg: &ExperimentConfig) -> CliResult<RunRecord> {
    let p = &cfg.params;
    let mu = p.mu.unwrap_or_default();
    let threshold = delta_threshold(mu, p.tol.unwrap_or(DEFAULT_TOL))?;
    let rows = curve_rows(mu)?;
    let svg_path = p
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("phi_curve.svg"));
    let csv_path = p
        .csv
        .clone()
        .unwrap_or_else(|| PathBuf::from("phi_curve.csv"));
    let table = csv(
        &["delta", "phi"],
        rows.iter().map(|(d, v)| vec![d.to_string(), v.to_string()]),
    );
    write_file(&csv_path, &table)?;
    write_file(&svg_path, &render_svg(mu, &rows, &threshold))?;
    let payload = json!({
        "threshold": json(threshold),
        "root_marker": threshold.drop_possible,
        "rows": rows.len(),
        "csv": csv_path,
        "svg": svg_path,
    });
    Ok(RunRecord::new(cfg, payload, Vec::new()))
}
