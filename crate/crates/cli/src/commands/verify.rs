use escape_dim_core::combinatorics::{
    self, cantor_level, exhaustive_block_suite, random_block_suite, random_gap_suite,
    stirling_grid, stirling_suite, SuiteTally, BLOCK_DELTAS, BLOCK_EPSILONS,
};
use escape_dim_core::shift::{shift_sweep, ShiftSweepConfig};
use escape_dim_core::torus::{
    bowen_inclusion, check_tiling, coveringballs_check, equidistribution_estimate,
    lemma_covering_count, random_duality_suite, tessellate, EquidistributionConfig, HyperbolicMap,
    Rect, RectUnion,
};
use escape_dim_core::{box_count_dimension, limsup_dim_bound, CoverSchedule, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::json;
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::record::{Check, RunRecord};

pub const DEFAULT_BLOCK_SAMPLES: u64 = 10_000;
pub const DEFAULT_EXHAUSTIVE_N: usize = 8;
pub const STIRLING_MAX_N: usize = 64;
pub const TORUS_RADII: [f64; 3] = [0.05, 0.1, 0.2];
pub const EQUIDISTRIBUTION_SAMPLES: u64 = 100_000;

fn tally_check(name: &str, t: SuiteTally, detail: Value) -> Check {
    Check::new(name, t.cases, t.failures, detail)
}

/// Runs `f` over the block-lemma grid in parallel and merges in grid order.
fn over_grid(f: impl Fn(f64, f64) -> Result<SuiteTally> + Sync) -> Result<SuiteTally> {
    let cells: Vec<(f64, f64)> = BLOCK_DELTAS
        .iter()
        .flat_map(|&d| BLOCK_EPSILONS.iter().map(move |&e| (d, e)))
        .collect();
    let tallies: Vec<SuiteTally> = cells
        .par_iter()
        .map(|&(d, e)| f(d, e))
        .collect::<Result<_>>()?;
    Ok(tallies
        .into_iter()
        .fold(SuiteTally::default(), SuiteTally::merge))
}

pub fn combinatorics_checks(seed: u64, samples: u64, exhaustive_n: usize) -> Result<Vec<Check>> {
    let grid = json!({ "deltas": BLOCK_DELTAS, "epsilons": BLOCK_EPSILONS });
    let mut checks = Vec::new();
    let random = over_grid(|d, e| random_block_suite(d, e, samples, seed))?;
    checks.push(tally_check(
        "block_lemma_random",
        random,
        json!({ "grid": grid, "per_cell": samples, "seed": seed }),
    ));
    let exhaustive = over_grid(|d, e| exhaustive_block_suite(d, e, exhaustive_n))?;
    checks.push(tally_check(
        "block_lemma_exhaustive",
        exhaustive,
        json!({ "grid": grid, "max_n": exhaustive_n }),
    ));

    let zs = stirling_grid();
    checks.push(tally_check(
        "stirling_exact",
        stirling_suite(STIRLING_MAX_N, &zs)?,
        json!({ "max_n": STIRLING_MAX_N, "z": zs }),
    ));
    let n0: Vec<usize> = zs
        .iter()
        .map(|&z| combinatorics::find_n0(z, STIRLING_MAX_N))
        .collect::<Result<_>>()?;
    let late = n0.iter().filter(|&&n| n > 1).count() as u64;
    checks.push(Check::new(
        "stirling_n0",
        zs.len() as u64,
        late,
        json!({ "n0": n0 }),
    ));

    let levels: Vec<_> = (4..=12).map(cantor_level).collect();
    let slope = box_count_dimension(&levels)?;
    let alpha = levels
        .iter()
        .zip(4..)
        .map(|(l, n)| (l.box_count() as f64).ln() / (n as f64 * 3f64.ln()))
        .collect();
    let limsup = limsup_dim_bound(&CoverSchedule::new(1.0 / 3.0, 1.0, 4, alpha)?)?;
    let target = 2f64.ln() / 3f64.ln();
    checks.push(Check::single(
        "limsup_cantor",
        (slope - target).abs() <= 0.02 && slope <= limsup + 0.03,
        json!({ "slope": slope, "target": target, "limsup_bound": limsup }),
    ));
    checks.push(tally_check(
        "discretization_gap",
        random_gap_suite(samples, seed)?,
        json!({ "seed": seed }),
    ));
    Ok(checks)
}

pub fn shift_checks(sweep: &ShiftSweepConfig) -> Result<Vec<Check>> {
    let s = shift_sweep(sweep)?;
    let detail = json!({
        "targets": s.targets,
        "instances": s.instances(),
        "max_n": sweep.max_n,
        "max_nt": sweep.max_nt,
        "max_ratio_uppcov": s.max_ratio_uppcov,
        "max_ratio_bowen_ball": s.max_ratio_bowen_ball,
    });
    let mut checks = vec![
        tally_check("shift_uppcov", s.uppcov, detail),
        tally_check("shift_bowen_ball", s.bowen_ball, Value::Null),
        tally_check("shift_markov", s.markov, Value::Null),
        tally_check("shift_disjoint_box", s.disjoint_box, Value::Null),
        tally_check("shift_count_identity", s.count_identity, Value::Null),
        tally_check("shift_monotonicity", s.monotonicity, Value::Null),
    ];
    if !s.failures.is_empty() {
        checks[0].detail["failures"] = json(&s.failures);
    }
    Ok(checks)
}

pub fn torus_checks(seed: u64, samples: u64) -> Result<Vec<Check>> {
    let hm = HyperbolicMap::cat();
    let mut checks = Vec::new();

    let mut tiling = SuiteTally::default();
    let mut inclusion = SuiteTally::default();
    for &r in &TORUS_RADII {
        let c = check_tiling(&tessellate([0.3, 0.4], r, &hm, 1.0)?);
        tiling.cases += 1;
        tiling.failures += u64::from(!(c.disjoint && c.covering));
        let b = bowen_inclusion(r)?;
        inclusion.cases += 1;
        inclusion.failures += u64::from(!b.holds);
    }
    checks.push(tally_check(
        "tessellation",
        tiling,
        json!({ "radii": TORUS_RADII }),
    ));
    checks.push(tally_check("bowen_inclusion", inclusion, Value::Null));

    let mut overlap = SuiteTally::default();
    let mut balls = SuiteTally::default();
    let mut worst = 0.0f64;
    for &r in &TORUS_RADII {
        for t in 2..=20 {
            let c = lemma_covering_count(t, r, &hm)?;
            overlap.cases += 1;
            overlap.failures += u64::from(!(c.boundary_verified && c.exact as f64 <= c.bound));
            worst = worst.max(c.exact as f64 / c.bound);
            let b = coveringballs_check(t, r, &hm)?;
            balls.cases += 1;
            balls.failures += u64::from(!b.holds);
        }
    }
    checks.push(tally_check(
        "overlap_count",
        overlap,
        json!({ "t": [2, 20], "max_ratio": worst }),
    ));
    checks.push(tally_check("covering_balls", balls, Value::Null));
    checks.push(tally_check(
        "metric_duality",
        random_duality_suite(20, seed)?,
        json!({ "seed": seed }),
    ));

    let half = RectUnion::new(vec![Rect::new(0.0, 0.5, 0.0, 1.0)?]);
    let cfg = EquidistributionConfig {
        base: [0.1234, 0.5678],
        target: half,
        r: 0.1,
        t_values: vec![30],
        samples,
        seed,
        exact_limit: 0,
    };
    let (p, se, _) = equidistribution_estimate(&cfg, &hm, 30)?;
    checks.push(Check::single(
        "equidistribution_half_torus",
        (p - 0.5).abs() <= 3.0 * se,
        json!({ "t": 30, "estimate": p, "standard_error": se, "samples": samples }),
    ));
    Ok(checks)
}

pub fn verify(cfg: &ExperimentConfig, emit: &mut dyn FnMut(&Check)) -> CliResult<RunRecord> {
    let p = &cfg.params;
    let suite = cfg.suite();
    let seed = p.seed.unwrap_or_default();
    let mut sweep = ShiftSweepConfig::default();
    if let Some(n) = p.max_n {
        sweep.max_n = n;
    }
    if let Some(nt) = p.max_nt {
        sweep.max_nt = nt;
    }
    let mut checks = Vec::new();
    let mut run = |checks_of: Vec<Check>| {
        for c in &checks_of {
            emit(c);
        }
        checks.extend(checks_of);
    };
    if suite == "combinatorics" || suite == "all" {
        run(combinatorics_checks(
            seed,
            p.samples.unwrap_or(DEFAULT_BLOCK_SAMPLES),
            DEFAULT_EXHAUSTIVE_N,
        )?);
    }
    if suite == "shift" || suite == "all" {
        run(shift_checks(&sweep)?);
    }
    if suite == "torus" || suite == "all" {
        run(torus_checks(seed, EQUIDISTRIBUTION_SAMPLES)?);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let instances: u64 = checks.iter().map(|c| c.cases).sum();
    let record = RunRecord::new(
        cfg,
        json!({ "suite": suite, "instances": instances, "failed": failed }),
        checks,
    );
    Ok(record)
}
