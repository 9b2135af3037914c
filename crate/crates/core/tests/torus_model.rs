use escape_dim_core::torus::{
    equidistribution_decay, sample_escape_set, sigma_core, EquidistributionConfig, EscapeSampling,
    HyperbolicMap, Rect, RectUnion,
};
use proptest::prelude::*;

fn sampling(mu: f64, delta: f64, base: [f64; 2], seed: u64) -> EscapeSampling {
    EscapeSampling {
        base,
        target: RectUnion::complement_of_square([0.0, 0.0], (1.0 - mu).sqrt()).unwrap(),
        r: 0.02,
        delta,
        n: 2,
        t: 5,
        grid_per_box: 4,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn escape_counts_fall_with_delta(
        mu in 0.5f64..0.95,
        bx in -0.05f64..0.05,
        by in -0.05f64..0.05,
        seed in 0u64..1000,
    ) {
        let hm = HyperbolicMap::cat();
        let k = hm.constants(hm.ln_lambda());
        let mut prev = u64::MAX;
        for delta in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let rep = sample_escape_set(&sampling(mu, delta, [bx, by], seed), &hm, &k).unwrap();
            let c = *rep.counts.last().unwrap();
            prop_assert!(c <= prev);
            prev = c;
        }
    }
}

#[test]
fn escape_reports_repeat_exactly() {
    let hm = HyperbolicMap::cat();
    let k = hm.constants(0.8);
    let a = sample_escape_set(&sampling(0.9, 0.9, [0.01, 0.0], 5), &hm, &k).unwrap();
    let b = sample_escape_set(&sampling(0.9, 0.9, [0.01, 0.0], 5), &hm, &k).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn decay_is_observed_on_a_box() {
    let hm = HyperbolicMap::cat();
    let cfg = EquidistributionConfig {
        base: [0.37, 0.81],
        target: RectUnion::new(vec![Rect::new(0.1, 0.6, 0.2, 0.5).unwrap()]),
        r: 0.05,
        t_values: (1..=10).collect(),
        samples: 10_000,
        seed: 1,
        exact_limit: 100_000,
    };
    let rep = equidistribution_decay(&cfg, &hm).unwrap();
    assert!((rep.target_measure - 0.15).abs() < 1e-12);
    let late = rep.points.last().unwrap();
    assert!(late.exact && late.deviation < 0.05);
}

#[test]
fn union_core_measure_brackets_the_exact_value() {
    let o = RectUnion::new(vec![
        Rect::new(0.1, 0.5, 0.1, 0.6).unwrap(),
        Rect::new(0.4, 0.9, 0.3, 0.8).unwrap(),
    ]);
    let exact = o.core_measure(0.05);
    let (grid, err) = sigma_core(&o, 0.05, 400).unwrap().measure();
    assert!(
        (grid - exact).abs() <= err + 1e-12,
        "{grid} ± {err} vs {exact}"
    );
}
