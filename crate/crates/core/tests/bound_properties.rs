use escape_dim_core::{
    b_of_z, codim_lower, delta_threshold, dim_upper, dim_upper_entropy_form, epsilon_from_z, phi,
    schedule, z_from_epsilon, z_star, SystemConstants,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn rearranged_and_entropy_forms_agree(
        y in 0.05f64..=1.0,
        delta in 0.05f64..0.9999,
        frac in 0.01f64..0.99,
        stretch in 1.0f64..4.0,
    ) {
        let k = SystemConstants::catmap(1.0);
        let sched = schedule(0.05, y, &k).unwrap();
        let z = frac * delta;
        let t = sched.t * stretch;
        let a = dim_upper(z, t, y, delta, &k, &sched).unwrap();
        let b = dim_upper_entropy_form(z, t, y, delta, &k, &sched).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn codim_is_monotone_in_delta(y in 0.1f64..=1.0, d1 in 0.5f64..0.9999, d2 in 0.5f64..0.9999) {
        let k = SystemConstants::shift();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = codim_lower(0.1, y, lo, &k).unwrap();
        let b = codim_lower(0.1, y, hi, &k).unwrap();
        prop_assert!(a.codim_lower <= b.codim_lower + 1e-15);
    }

    #[test]
    fn drop_iff_above_threshold(y in 0.2f64..=1.0, delta in 0.9f64..1.0) {
        let k = SystemConstants::shift();
        let rep = codim_lower(0.1, y, delta, &k).unwrap();
        let d_o = delta_threshold(y, 1e-12).unwrap().delta_o;
        if (delta - d_o).abs() > 1e-9 {
            prop_assert_eq!(rep.drop_achieved, delta > d_o);
        }
    }

    #[test]
    fn z_epsilon_round_trip(delta in 0.01f64..0.999, frac in 0.001f64..0.999) {
        let z = frac * delta;
        let eps = epsilon_from_z(z, delta).unwrap();
        prop_assert!((z_from_epsilon(eps, delta).unwrap() - z).abs() <= 1e-12);
    }

    #[test]
    fn entropy_bound_is_at_most_two(z in 0.0f64..=1.0) {
        let b = b_of_z(z).unwrap();
        prop_assert!((1.0..=2.0 + 1e-15).contains(&b));
    }
}

#[test]
fn threshold_root_is_a_sign_change() {
    for y in [0.3, 0.5, 0.8, 1.0] {
        let t = delta_threshold(y, 1e-12).unwrap();
        let s = t.root_s.unwrap();
        assert!(phi(y, s - 1e-9).unwrap() > 0.0);
        assert!(phi(y, s + 1e-9).unwrap() < 0.0);
        assert!(!t.ambiguous);
    }
}

#[test]
fn optimal_z_beats_neighbours() {
    for delta in [0.2, 0.6, 0.95] {
        let z = z_star(delta).unwrap().z;
        let f = |z: f64| z * (delta - z) / (1.0 - z);
        assert!(f(z) >= f(z * 0.999) && f(z) >= f(z * 1.001));
    }
}

#[test]
fn constants_round_trip_through_json() {
    for k in [SystemConstants::shift(), SystemConstants::catmap(0.7)] {
        let text = serde_json::to_string(&k).unwrap();
        assert!(text.contains("\"r2\""));
        let back: SystemConstants = serde_json::from_str(&text).unwrap();
        assert_eq!(back, k);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
