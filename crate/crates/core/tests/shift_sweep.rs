use escape_dim_core::shift::{shift_sweep, ShiftSweepConfig};

#[test]
fn full_grid_sweep_verifies_every_instance() {
    let start = std::time::Instant::now();
    let summary = shift_sweep(&ShiftSweepConfig::default()).unwrap();
    eprintln!("{summary:?} in {:?}", start.elapsed());
    assert!(summary.passed(), "{:#?}", summary.failures);
    assert_eq!(summary.targets, 20);
    assert!(summary.max_ratio_uppcov <= 1.0);
    assert!(summary.max_ratio_bowen_ball <= 1.0);
}
