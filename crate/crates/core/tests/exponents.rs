mod common;

use common::{binary_entropy_direct, e0_direct, e0_grid, grid_exponent, matrix, r_max_direct};
use dnazue::exponents::{
    e0_tilde, erasure_exponent, exponent_sweep, r_max, typewriter_c0u_lower_bound, DEFAULT_RHO_HI,
};
use dnazue::inner_code::theorem2_bound;
use dnazue::{Channel, ExponentOptions};
use proptest::prelude::*;

fn builtins() -> Vec<Channel> {
    vec![
        Channel::erasure(2, 0.3).unwrap(),
        Channel::erasure(2, 0.5).unwrap(),
        Channel::erasure(4, 0.1).unwrap(),
        Channel::erasure(3, 0.0).unwrap(),
        Channel::typewriter(0.5).unwrap(),
        Channel::typewriter(0.1).unwrap(),
        Channel::identity(3).unwrap(),
        Channel::qary_symmetric(3, 0.2).unwrap(),
    ]
}

#[test]
fn optimiser_matches_dense_grid_for_builtin_channels() {
    let opts = ExponentOptions::default();
    for ch in builtins() {
        let w = matrix(&ch);
        let (rhos, e0) = e0_grid(&w, DEFAULT_RHO_HI, 1_000_001);
        let rm = r_max_direct(&w).max(0.1);
        let rates: Vec<f64> = (0..50).map(|i| 1.2 * rm * i as f64 / 49.0).collect();
        let curve = exponent_sweep(&ch, &rates, opts).unwrap();
        for p in &curve.points {
            let oracle = grid_exponent(&rhos, &e0, p.rate);
            assert!(
                (p.exponent - oracle).abs() <= 1e-8,
                "{} at R={}: {} vs grid {}",
                ch.name(),
                p.rate,
                p.exponent,
                oracle
            );
        }
    }
}

#[test]
fn e0_matches_direct_summation() {
    for ch in builtins() {
        let w = matrix(&ch);
        for rho in [0.0, 1e-8, 1e-3, 0.5, 1.0, 3.7, 20.0, 64.0] {
            let a = e0_tilde(&ch, rho).unwrap();
            let b = e0_direct(&w, rho);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{} rho={rho}: {a} vs {b}", ch.name());
        }
    }
}

#[test]
fn erasure_e0_closed_form() {
    for (q, p) in [(2usize, 0.3), (4, 0.1), (5, 0.77)] {
        let ch = Channel::erasure(q, p).unwrap();
        for rho in [0.01, 0.5, 2.0, 10.0] {
            let closed = -((1.0 - p) * (q as f64).powf(-rho) + p).ln();
            assert!((e0_tilde(&ch, rho).unwrap() - closed).abs() < 1e-14);
        }
    }
}

#[test]
fn e0_over_rho_is_non_increasing_and_starts_at_r_max() {
    let grid: Vec<f64> = (1..=640).map(|i| i as f64 * 0.1).collect();
    for ch in builtins() {
        assert_eq!(e0_tilde(&ch, 0.0).unwrap(), 0.0);
        let ratios: Vec<f64> = grid.iter().map(|&r| e0_tilde(&ch, r).unwrap() / r).collect();
        for (i, pair) in ratios.windows(2).enumerate() {
            assert!(pair[1] <= pair[0] + 1e-12, "{} at rho={}", ch.name(), grid[i + 1]);
        }
        let slope = e0_tilde(&ch, 1e-6).unwrap() / 1e-6;
        assert!((slope - r_max(&ch)).abs() < 1e-4, "{}: {slope}", ch.name());
    }
}

#[test]
fn exponent_sign_around_r_max() {
    let opts = ExponentOptions::default();
    for ch in builtins() {
        let rm = r_max(&ch);
        for f in [1.0, 1.01, 1.5, 3.0] {
            let e = erasure_exponent(&ch, f * rm, opts).unwrap().exponent;
            assert!(e <= 1e-9, "{} at {f} R_max: {e}", ch.name());
        }
        if rm > 0.0 {
            for f in [0.0, 0.1, 0.5, 0.9, 0.99] {
                let e = erasure_exponent(&ch, f * rm, opts).unwrap().exponent;
                assert!(e > 0.0, "{} at {f} R_max", ch.name());
            }
        }
    }
}

#[test]
fn grid_example_for_binary_erasure() {
    let ch = Channel::erasure(2, 0.5).unwrap();
    let points = 1_000_001;
    let mut best = 0.0f64;
    for i in 0..points {
        let rho = 64.0 * i as f64 / (points - 1) as f64;
        best = best.max(-(0.5 * 2f64.powf(-rho) + 0.5).ln() - 0.1 * rho);
    }
    let pt = erasure_exponent(&ch, 0.1, ExponentOptions::default()).unwrap();
    assert!((pt.exponent - best).abs() <= 1e-8);

    let bound = theorem2_bound(&ch, 20, 0.1, ExponentOptions::default()).unwrap();
    assert!((bound - (-20.0 * best).exp()).abs() <= 20.0 * 1e-8 * bound);
}

#[test]
fn identity_exponent_is_capped() {
    let ch = Channel::identity(4).unwrap();
    let opts = ExponentOptions::default();
    let pt = erasure_exponent(&ch, 0.3, opts).unwrap();
    assert!(pt.saturated);
    assert!((pt.exponent - opts.rho_hi * (4f64.ln() - 0.3)).abs() < 1e-9);
    let low = erasure_exponent(&Channel::erasure(2, 0.3).unwrap(), 0.3, opts).unwrap();
    assert!(!low.saturated);
}

#[test]
fn typewriter_crossover_constant() {
    // Solve ln 2 - h(eps)/2 = ln(3/2) on (0, 1/2) by bisection.
    let g = |e: f64| std::f64::consts::LN_2 - 0.5 * binary_entropy_direct(e) - 1.5f64.ln();
    let (mut a, mut b) = (1e-9, 0.5);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let root = 0.5 * (a + b);
    assert!((root - 0.2622).abs() < 5e-5, "{root}");
    assert!((typewriter_c0u_lower_bound(0.2622).unwrap() - 1.5f64.ln()).abs() < 1e-3);
    assert!(typewriter_c0u_lower_bound(0.1).unwrap() > 1.5f64.ln());
    assert!(typewriter_c0u_lower_bound(0.3).unwrap() < 1.5f64.ln());
}

#[test]
fn r_max_closed_forms() {
    for q in [2usize, 3, 4, 8] {
        for p in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let ch = Channel::erasure(q, p).unwrap();
            assert!((r_max(&ch) - (1.0 - p) * (q as f64).ln()).abs() < 1e-12);
        }
    }
    for eps in [0.01, 0.1, 0.5, 0.9, 0.99] {
        assert!((r_max(&Channel::typewriter(eps).unwrap()) - 1.5f64.ln()).abs() < 1e-12);
    }
}

fn random_channel() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..5, 2usize..6).prop_flat_map(|(q, outputs)| {
        prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], outputs), q).prop_filter_map(
            "every row needs positive mass",
            |rows| {
                rows.iter()
                    .all(|r| r.iter().sum::<f64>() > 0.0)
                    .then(|| {
                        rows.into_iter()
                            .map(|r| {
                                let s: f64 = r.iter().sum();
                                r.into_iter().map(|v| v / s).collect()
                            })
                            .collect()
                    })
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn e0_is_concave_nondecreasing_and_bounded_by_r_max(rows in random_channel()) {
        let ch = Channel::new("random", &rows).unwrap();
        let rm = r_max(&ch);
        prop_assert!((rm - r_max_direct(&rows)).abs() < 1e-12);
        let v: Vec<f64> = (0..=200).map(|i| e0_tilde(&ch, i as f64 * 0.1).unwrap()).collect();
        for i in 1..v.len() {
            prop_assert!(v[i] >= v[i - 1] - 1e-12);
            prop_assert!(v[i] <= rm * (i as f64 * 0.1) + 1e-9);
        }
        for i in 1..v.len() - 1 {
            prop_assert!(v[i - 1] + v[i + 1] - 2.0 * v[i] <= 1e-10);
        }
    }

    #[test]
    fn exponent_is_non_increasing_in_rate(rows in random_channel(), a in 0.0f64..1.5, b in 0.0f64..1.5) {
        let ch = Channel::new("random", &rows).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let opts = ExponentOptions::default();
        let e_lo = erasure_exponent(&ch, lo, opts).unwrap().exponent;
        let e_hi = erasure_exponent(&ch, hi, opts).unwrap().exponent;
        prop_assert!(e_hi <= e_lo + 1e-9);
    }
}
