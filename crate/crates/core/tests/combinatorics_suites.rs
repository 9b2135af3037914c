use escape_dim_core::combinatorics::{
    exhaustive_block_suite, random_block_suite, random_gap_suite, stirling_grid, stirling_suite,
    BLOCK_DELTAS, BLOCK_EPSILONS,
};
use escape_dim_core::{check_block_decomposition, min_high_blocks, BlockAverageVector};
use proptest::prelude::*;

#[test]
fn block_grid_suites_pass() {
    for &d in &BLOCK_DELTAS {
        for &e in &BLOCK_EPSILONS {
            let t = random_block_suite(d, e, 5_000, 1).unwrap();
            assert!(t.passed() && t.cases == 5_000, "({d}, {e}): {t:?}");
            assert!(exhaustive_block_suite(d, e, 6).unwrap().passed());
        }
    }
}

#[test]
fn suites_are_seeded() {
    assert_eq!(
        random_block_suite(0.7, 0.2, 30_000, 9).unwrap(),
        random_block_suite(0.7, 0.2, 30_000, 9).unwrap()
    );
    assert_eq!(
        random_gap_suite(5_000, 3).unwrap(),
        random_gap_suite(5_000, 3).unwrap()
    );
}

#[test]
fn stirling_holds_on_the_grid() {
    let t = stirling_suite(64, &stirling_grid()).unwrap();
    assert_eq!(t.cases, 64 * 19);
    assert!(t.passed());
}

proptest! {
    #[test]
    fn lemma_holds_for_arbitrary_vectors(
        raw in prop::collection::vec(0.0f64..=1.0, 1..40),
        delta in 0.05f64..=1.0,
        frac in 0.05f64..0.95,
    ) {
        let epsilon = frac * delta;
        // Pull entries towards 1 until the mean reaches delta.
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let theta = if mean < delta { (delta - mean) / (1.0 - mean) } else { 0.0 };
        let a: Vec<f64> = raw.iter().map(|x| (x + (1.0 - x) * theta).min(1.0)).collect();
        let v = BlockAverageVector::new(a).unwrap();
        let c = check_block_decomposition(&v, delta, epsilon).unwrap();
        prop_assert!(c.holds);
        prop_assert_eq!(c.required, min_high_blocks(delta, epsilon, v.len()).unwrap());
    }
}
