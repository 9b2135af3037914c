use escape_dim_core::torus::{
    equidistribution_decay, sample_escape_set, EquidistributionConfig, EscapeSampling,
    HyperbolicMap, RectUnion,
};
use serde_json::json;

use super::{csv, json, write_file};
use crate::config::ExperimentConfig;
use crate::error::{config, CliResult};
use crate::record::{Check, RunRecord};

/// `μ(O)` when `--mu` is absent.
pub const DEFAULT_TARGET_MEASURE: f64 = 0.9;
pub const DEFAULT_GRID_PER_BOX: u32 = 4;
/// Times used to fit `λ'`.
pub const FIT_TIMES: std::ops::RangeInclusive<u32> = 1..=12;
const FIT_SAMPLES: u64 = 10_000;
const FIT_EXACT_LIMIT: usize = 100_000;

/// Cat-map experiment: `O` is the torus minus a square of measure `1 - μ`
/// centred at the fixed point, and the segment is based at `--base`
/// (default the fixed point).
pub fn simulate(cfg: &ExperimentConfig) -> CliResult<RunRecord> {
    let p = &cfg.params;
    let mu = p.mu.unwrap_or(DEFAULT_TARGET_MEASURE);
    if !(mu > 0.0 && mu < 1.0) {
        return config(format!("mu = {mu} must lie in (0, 1) for simulate"));
    }
    let hm = HyperbolicMap::cat();
    let target = RectUnion::complement_of_square([0.0, 0.0], (1.0 - mu).sqrt())?;
    let base = p.base.as_deref().map_or([0.0, 0.0], |b| [b[0], b[1]]);
    let r = p.r.unwrap_or_default();
    let seed = p.seed.unwrap_or_default();

    let equi = equidistribution_decay(
        &EquidistributionConfig {
            base,
            target: target.clone(),
            r,
            t_values: FIT_TIMES.collect(),
            samples: p.samples.unwrap_or(FIT_SAMPLES),
            seed,
            exact_limit: FIT_EXACT_LIMIT,
        },
        &hm,
    )?;
    let mut k = cfg.constants("catmap")?;
    let source = match (
        p.lambda_prime,
        p.constants_file.is_some(),
        equi.lambda_prime_fit,
    ) {
        (Some(_), _, _) => "flag",
        (None, true, _) => "constants-file",
        (None, false, Some(fit)) => {
            k.lambda_prime = fit;
            "fit"
        }
        (None, false, None) => "fallback: ln lambda_u",
    };

    let sampling = EscapeSampling {
        base,
        target,
        r,
        delta: p.delta.unwrap_or_default(),
        n: p.n.unwrap_or_default(),
        t: p.t.unwrap_or_default(),
        grid_per_box: p.grid_per_box.unwrap_or(DEFAULT_GRID_PER_BOX),
        seed,
    };
    let escape = sample_escape_set(&sampling, &hm, &k)?;
    if let Some(path) = &p.csv {
        let rows = (0..escape.counts.len()).map(|i| {
            vec![
                (i + 1).to_string(),
                ((i as u32 + 1) * sampling.t).to_string(),
                escape.scales[i].to_string(),
                escape.boxes[i].to_string(),
                escape.counts[i].to_string(),
                escape.exponents[i].map_or_else(|| "-inf".to_string(), |e| e.to_string()),
            ]
        });
        write_file(
            path,
            &csv(
                &["level", "horizon", "scale", "boxes", "count", "exponent"],
                rows,
            ),
        )?;
    }
    let checks = vec![Check::single(
        "escape_exponent_consistent",
        escape.consistent,
        json!({
            "exponent": escape.exponent,
            "limit": k.dim_p as f64 - escape.theoretical_codim + escape.tolerance,
        }),
    )];
    let payload = json!({
        "system": "catmap",
        "target_measure": mu,
        "base": base,
        "lambda_prime": k.lambda_prime,
        "lambda_prime_source": source,
        "constants": json(k),
        "equidistribution": json(&equi),
        "escape": json(&escape),
    });
    Ok(RunRecord::new(cfg, payload, checks))
}
