use std::process::{Command, Output};

use escape_dim_cli::RunRecord;
use serde_json::Value;

fn escape_dim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_escape-dim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn record(out: &Output) -> RunRecord {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    RunRecord::from_json(text.lines().last().expect("a record line")).unwrap()
}

#[test]
fn bound_reports_the_certified_codimension() {
    let out = escape_dim(&[
        "bound",
        "--mu",
        "0.3",
        "--delta",
        "0.9996",
        "--r",
        "0.1",
        "--constants",
        "shift",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rec = record(&out);
    let c = rec.payload["report"]["codim_lower"].as_f64().unwrap();
    assert!((c - 3.697333777874615e-4).abs() < 1e-12);
    assert_eq!(rec.payload["report"]["drop_achieved"], Value::Bool(true));

    let out = escape_dim(&[
        "bound",
        "--mu",
        "0.3",
        "--delta",
        "0.9",
        "--r",
        "0.1",
        "--constants",
        "shift",
    ]);
    let rec = record(&out);
    assert_eq!(rec.payload["report"]["drop_achieved"], Value::Bool(false));
    assert_eq!(rec.payload["report"]["codim_lower"].as_f64(), Some(0.0));
}

#[test]
fn exit_codes_follow_the_contract() {
    let missing = escape_dim(&["bound", "--delta", "0.9", "--r", "0.1"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(missing.stdout.is_empty());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--mu"));

    assert_eq!(
        escape_dim(&["verify", "--suite", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        escape_dim(&["bound", "--mu", "0.3", "--delta", "0.9", "--r", "0.1", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        escape_dim(&["bound", "--mu", "0.3", "--delta", "1.5", "--r", "0.1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        escape_dim(&["bound", "--mu", "0.3", "--delta", "0.9", "--r", "0.4"])
            .status
            .code(),
        Some(3)
    );

    let budget = escape_dim(&[
        "simulate", "catmap", "--delta", "0.999", "--r", "0.05", "--N", "10", "--T", "10",
        "--seed", "7",
    ]);
    assert_eq!(budget.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&budget.stderr).contains("budget"));

    let no_seed = escape_dim(&[
        "simulate", "catmap", "--delta", "0.999", "--r", "0.05", "--N", "3", "--T", "6",
    ]);
    assert_eq!(no_seed.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("c.svg");
    let out = escape_dim(&[
        "curve",
        "--mu",
        "0.8",
        "--out",
        bad.to_str().unwrap(),
        "--csv",
        dir.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn curve_writes_csv_and_annotated_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("phi.svg");
    let csv = dir.path().join("phi.csv");
    let out = escape_dim(&[
        "curve",
        "--mu",
        "0.8",
        "--out",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("delta,phi\n") && !table.contains('\r'));
    assert_eq!(table.lines().count(), 2001);

    let threshold = escape_dim(&["threshold", "--mu", "0.8"]);
    let d = record(&threshold).payload["threshold"]["delta_o"]
        .as_f64()
        .unwrap();
    let image = std::fs::read_to_string(&svg).unwrap();
    assert!(image.contains(r#"width="800" height="500""#));
    assert!(image.contains(">delta<") && image.contains(">phi<"));
    let marker = image
        .split(r#"id="root-marker" data-delta=""#)
        .nth(1)
        .unwrap();
    let marked: f64 = marker.split('"').next().unwrap().parse().unwrap();
    assert_eq!(marked, d);
    assert!((marked - 0.9888).abs() < 5e-4);
}

#[test]
fn curve_without_a_root_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("phi.svg");
    let out = escape_dim(&[
        "curve",
        "--mu",
        "1e-9",
        "--out",
        svg.to_str().unwrap(),
        "--csv",
        dir.path().join("phi.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(record(&out).payload["root_marker"], Value::Bool(false));
    let image = std::fs::read_to_string(&svg).unwrap();
    assert!(!image.contains("root-marker") && image.contains("no-root"));
}

#[test]
fn verify_shift_suite_emits_check_lines() {
    let out = escape_dim(&["verify", "--suite", "shift", "--max-nt", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let lines: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() > 1);
    let rec = record(&out);
    assert!(rec.passed);
    assert!(rec.payload["instances"].as_u64().unwrap() >= 500);
    assert_eq!(lines.len() - 1, rec.checks.len());
}

#[test]
fn verify_combinatorics_is_deterministic() {
    let a = escape_dim(&[
        "verify",
        "--suite",
        "combinatorics",
        "--seed",
        "42",
        "--samples",
        "2000",
    ]);
    let b = escape_dim(&[
        "verify",
        "--suite",
        "combinatorics",
        "--seed",
        "42",
        "--samples",
        "2000",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(record(&a).checks.iter().all(|c| c.passed));
}

#[test]
fn simulate_is_reproducible_and_consistent() {
    let args = [
        "simulate", "catmap", "--delta", "0.999", "--r", "0.05", "--N", "3", "--T", "6", "--seed",
        "7",
    ];
    let a = escape_dim(&args);
    let b = escape_dim(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rec = record(&a);
    assert_eq!(rec.payload["escape"]["consistent"], Value::Bool(true));
    assert_eq!(rec.payload["escape"]["empirical"], Value::Bool(true));
}

#[test]
fn records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.json");
    let out = escape_dim(&[
        "simulate",
        "catmap",
        "--delta",
        "1",
        "--r",
        "0.01",
        "--mu",
        "0.99",
        "--N",
        "2",
        "--T",
        "5",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let rec = RunRecord::from_json(text.trim_end()).unwrap();
    assert_eq!(rec.to_json(), text.trim_end());
    assert_eq!(RunRecord::from_json(&rec.to_json()).unwrap(), rec);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"mu": 0.3, "delta": 0.9996, "r": 0.1, "constants": "shift"}"#,
    )
    .unwrap();
    let from_file = record(&escape_dim(&["bound", "--config", cfg.to_str().unwrap()]));
    let direct = record(&escape_dim(&[
        "bound",
        "--mu",
        "0.3",
        "--delta",
        "0.9996",
        "--r",
        "0.1",
        "--constants",
        "shift",
    ]));
    assert_eq!(from_file.payload, direct.payload);

    let overridden = record(&escape_dim(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--delta",
        "0.9",
    ]));
    assert_eq!(overridden.config.params.delta, Some(0.9));

    std::fs::write(&cfg, r#"{"mu": 0.3, "unknown": 1}"#).unwrap();
    assert_eq!(
        escape_dim(&["bound", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn constants_file_matches_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    let k = serde_json::to_string(&escape_dim_core::SystemConstants::shift()).unwrap();
    std::fs::write(&path, k).unwrap();
    let args = |extra: &[&str]| {
        let mut v = vec!["bound", "--mu", "0.5", "--delta", "0.999", "--r", "0.1"];
        v.extend_from_slice(extra);
        record(&escape_dim(&v)).payload
    };
    assert_eq!(
        args(&["--constants-file", path.to_str().unwrap()]),
        args(&["--constants", "shift"])
    );
}

#[test]
fn bound_csv_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bound.csv");
    let out = escape_dim(&[
        "bound",
        "--mu",
        "0.3",
        "--delta",
        "0.9996",
        "--r",
        "0.1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table
        .lines()
        .next()
        .unwrap()
        .starts_with("mu,delta,r,T,phi"));
}
