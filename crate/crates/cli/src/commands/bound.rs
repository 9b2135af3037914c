use escape_dim_core::{codim_lower, delta_threshold, reference_bounds};
use serde_json::json;

use super::{csv, json, write_file};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::record::{Check, RunRecord};

pub const DEFAULT_TOL: f64 = 1e-10;

pub fn bound(cfg: &ExperimentConfig) -> CliResult<RunRecord> {
    let p = &cfg.params;
    let (mu, delta, r) = (
        p.mu.unwrap_or_default(),
        p.delta.unwrap_or_default(),
        p.r.unwrap_or_default(),
    );
    let k = cfg.constants("shift")?;
    let report = codim_lower(r, mu, delta, &k)?;
    let reference = reference_bounds(r, mu, r, k.dim_p)?;
    if let Some(path) = &p.csv {
        let row = vec![
            mu.to_string(),
            delta.to_string(),
            r.to_string(),
            report.schedule.t.to_string(),
            report.phi_value.to_string(),
            report.codim_signed.to_string(),
            report.codim_lower.to_string(),
            report.drop_achieved.to_string(),
        ];
        let header = [
            "mu",
            "delta",
            "r",
            "T",
            "phi",
            "codim_signed",
            "codim_lower",
            "drop_achieved",
        ];
        write_file(path, &csv(&header, [row]))?;
    }
    let payload = json!({ "report": json(&report), "reference": json(reference) });
    Ok(RunRecord::new(cfg, payload, Vec::new()))
}

pub fn threshold(cfg: &ExperimentConfig) -> CliResult<RunRecord> {
    let mu = cfg.params.mu.unwrap_or_default();
    let dt = delta_threshold(mu, cfg.params.tol.unwrap_or(DEFAULT_TOL))?;
    let floor = 1.0 - mu * mu / 4.0;
    let checks = vec![Check::single(
        "threshold_above_1_minus_mu_sq_over_4",
        dt.delta_o > floor,
        json!({ "delta_o": dt.delta_o, "floor": floor }),
    )];
    Ok(RunRecord::new(
        cfg,
        json!({ "threshold": json(dt) }),
        checks,
    ))
}
