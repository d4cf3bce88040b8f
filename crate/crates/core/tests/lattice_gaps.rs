use std::f64::consts::PI;

use proptest::prelude::*;
use qgraph::lattice::{
    classify_golden, enumerate_gaps, gap_lhs, golden_a, golden_limit, golden_mean, RectLattice, Regime, Variant,
};

/// Dense-grid oracle: number of maximal runs of grid points satisfying the
/// raw gap condition with naive floor arithmetic, for k in (k0, k_max].
fn brute_force_runs(a: f64, b: f64, alpha: f64, k0: f64, k_max: f64, n: usize) -> usize {
    let naive = |k: f64| -> bool {
        let xa = k * a / 2.0 - PI / 2.0 * (k * a / PI).floor();
        let xb = k * b / 2.0 - PI / 2.0 * (k * b / PI).floor();
        if alpha > 0.0 {
            2.0 * k * (xa.tan() + xb.tan()) < alpha
        } else {
            2.0 * k * (1.0 / xa.tan() + 1.0 / xb.tan()) < -alpha
        }
    };
    let mut runs = 0;
    let mut inside = false;
    for i in 1..=n {
        let k = k0 + (k_max - k0) * i as f64 / n as f64;
        let g = naive(k);
        if g && !inside {
            runs += 1;
        }
        inside = g;
    }
    runs
}

#[test]
fn golden_single_gap_matches_brute_force() {
    let th = golden_mean();
    let lat = RectLattice::new(th, 1.0, -4.35 / th).unwrap();
    let r = enumerate_gaps(&lat, 1e4).unwrap();
    assert_eq!(r.count, 1, "{:?}", r.gaps);
    assert_eq!(brute_force_runs(th, 1.0, -4.35 / th, 0.5, 100.0, 2_000_000), 1);
    // the gap sits just below k = π/a
    let g = r.gaps[0];
    assert!(g.hi.sqrt() - PI / th < 1e-9);
}

#[test]
fn rational_ratio_has_growing_gap_count() {
    let lat = RectLattice::new(1.0, 1.0, 0.5).unwrap();
    let small = enumerate_gaps(&lat, 1e3).unwrap();
    let large = enumerate_gaps(&lat, 1e5).unwrap();
    assert!(large.count > small.count);
    for g in &large.gaps {
        let k = g.lo.sqrt();
        assert!((k / PI - (k / PI).round()).abs() < 1e-9, "gap not at πℤ: {k}");
    }
    assert_eq!(small.count, brute_force_runs(1.0, 1.0, 0.5, 1.0, 1e3f64.sqrt(), 400_000));
}

#[test]
fn plus_variant_zero_at_common_zeros() {
    for n in 1..20 {
        let k = n as f64 * PI * (1.0 + 4.0 * f64::EPSILON);
        assert!(gap_lhs(k, 1.0, 1.0, Variant::Plus).abs() < 1e-10);
    }
}

#[test]
fn golden_plus_minima_stay_above_limit() {
    // local minima of the tan variant (values just past k = nπ/a) times a
    let th = golden_mean();
    let mut mins = Vec::new();
    for n in 1..2000 {
        let k = n as f64 * PI / th;
        mins.push(gap_lhs(k * (1.0 + 1e-15), th, 1.0, Variant::Plus) * th);
    }
    let low = mins.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(low > golden_limit() - 1e-6, "{low}");
}

#[test]
fn classification_examples() {
    let a = 1.0;
    assert_eq!(classify_golden(golden_limit() * 1.01, a).unwrap().regime, Regime::Infinite);
    assert_eq!(classify_golden(0.0, a).unwrap().regime, Regime::NoGaps);
    let c = classify_golden(-4.35, a).unwrap();
    assert_eq!(c.regime, Regime::Finite(1));
    assert_eq!(c.cross_check.unwrap().count, 1);
}

#[test]
fn threshold_boundaries() {
    let a = 2.0;
    let a1 = golden_a(1).unwrap();
    assert_eq!(classify_golden(-a1 / a, a).unwrap().regime, Regime::NoGaps);
    assert_eq!(classify_golden(-golden_limit() / a, a).unwrap().regime, Regime::Infinite);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn finite_regime_matches_enumeration(t in 0.0f64..1.0) {
        let a = golden_mean();
        let lo = golden_a(1).unwrap();
        let hi = golden_a(7).unwrap();
        let alpha = -(lo + t * (hi - lo)) / a;
        let predicted = classify_golden(alpha, a).unwrap().regime;
        let lat = RectLattice::new(a, a / golden_mean(), alpha).unwrap();
        let e_max = 1e6 * (PI / a).powi(2);
        let r = enumerate_gaps(&lat, e_max).unwrap();
        prop_assert_eq!(predicted, Regime::Finite(r.count));
    }

    #[test]
    fn gap_edges_solve_equality(alpha in prop_oneof![-6.0f64..-0.5, 0.5f64..6.0], ratio in 1.05f64..2.5) {
        let lat = RectLattice::new(ratio, 1.0, alpha).unwrap();
        let r = enumerate_gaps(&lat, 4e3).unwrap();
        for g in &r.gaps {
            prop_assert!(g.lo > 0.0 && g.lo < g.hi);
            // the edge that is not a breakpoint solves lhs = |α|
            let (kl, kh) = (g.lo.sqrt(), g.hi.sqrt());
            let root = if alpha > 0.0 { kh } else { kl };
            if root < r.e_max.sqrt() * (1.0 - 1e-12) {
                let res = (lat.lhs(root) - alpha.abs()) / alpha.abs();
                prop_assert!(res.abs() < 1e-8, "residual {res} at k = {root}");
            }
        }
        for w in r.gaps.windows(2) {
            prop_assert!(w[0].hi < w[1].lo);
        }
    }

    #[test]
    fn count_monotone_in_negative_alpha(x in 4.2f64..4.41, dx in 0.0f64..0.05) {
        let a = golden_mean();
        let count = |s: f64| {
            let lat = RectLattice::new(a, 1.0, -s / a).unwrap();
            enumerate_gaps(&lat, 1e5).unwrap().count
        };
        prop_assert!(count(x + dx) >= count(x));
    }
}

#[test]
fn count_next_to_the_limit_is_unresolvable() {
    let a = golden_mean();
    let just_inside = f64::from_bits((-golden_limit() / a).to_bits() - 1);
    assert!(matches!(classify_golden(just_inside, a), Err(qgraph::Error::NonConvergence(_))));
    let x = 0.5 * (golden_a(12).unwrap() + golden_a(13).unwrap());
    assert_eq!(classify_golden(-x / a, a).unwrap().regime, Regime::Finite(12));
}
