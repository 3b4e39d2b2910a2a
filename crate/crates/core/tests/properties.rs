use std::f64::consts::PI;

use elastic_core::curve::random_support_curve;
use elastic_core::flow::{parse_series_csv, series_csv};
use elastic_core::gap::{coercivity_parts, default_n_max};
use elastic_core::spectral;
use elastic_core::support::reconstruct;
use elastic_core::verify::{inequality_ratio, Inequality};
use elastic_core::*;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn rotate(curve: &ClosedCurve, angle: f64) -> ClosedCurve {
    let (s, c) = angle.sin_cos();
    ClosedCurve::new(curve.points().iter().map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect()).unwrap()
}

/// Mean-zero trigonometric polynomial with the given `(cos, sin)` pairs on
/// frequencies `1..`.
fn trig_poly(coeffs: &[(f64, f64)], n: usize) -> Vec<f64> {
    spectral::grid(n)
        .iter()
        .map(|&u| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let j = (i + 1) as f64;
                    a * (j * u).cos() + b * (j * u).sin()
                })
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn k_osc_is_similarity_invariant(
        seed in 0u64..10_000,
        omega in 1u32..=3,
        scale in 0.2f64..5.0,
        angle in 0.0f64..(2.0 * PI),
        shift in prop::array::uniform2(-3.0f64..3.0),
    ) {
        let c = random_support_curve(seed, omega, 128).unwrap();
        let base = compute_geometry(&c).unwrap();
        let moved = rotate(&c.scaled(scale), angle).translated(shift);
        let g = compute_geometry(&moved).unwrap();
        prop_assert!((g.oscillation - base.oscillation).abs() <= 1e-9 * base.oscillation.max(1e-12));
        prop_assert!((g.energy * scale - base.energy).abs() <= 1e-9 * base.energy);
        prop_assert!((g.length / scale - base.length).abs() <= 1e-12 * base.length);
        prop_assert_eq!(g.turning_number, omega as i64);
    }

    #[test]
    fn turning_number_flips_under_reversal(seed in 0u64..10_000, omega in 1u32..=4) {
        let c = random_support_curve(seed, omega, 128).unwrap();
        prop_assert_eq!(turning_number(&c).unwrap().0, omega as i64);
        prop_assert_eq!(turning_number(&c.reversed()).unwrap().0, -(omega as i64));
    }

    #[test]
    fn ibp_ratio_never_exceeds_one(
        omega in 1i64..=6,
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=16),
    ) {
        prop_assume!(coeffs.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3));
        let f = trig_poly(&coeffs, 64);
        let r = inequality_ratio(&f, omega, Inequality::Ibp).unwrap();
        prop_assert!(r <= 1.0 + 1e-10);
    }

    #[test]
    fn support_reconstruction_round_trips(seed in 0u64..10_000, omega in 1u32..=3) {
        let c = random_support_curve(seed, omega, 128).unwrap();
        let dec = support_decomposition(&c).unwrap();
        let rebuilt = reconstruct(&dec);
        let worst = rebuilt
            .iter()
            .zip(&dec.positions)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-9, "worst {worst:e}");
        prop_assert!(dec.rho.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn key_identities_hold_on_random_curves(seed in 0u64..10_000, omega in 1u32..=3) {
        let c = random_support_curve(seed, omega, 256).unwrap();
        let g = compute_geometry(&c).unwrap();
        let key = g.integrate_with(|j| (2.0 * g.k_ss[j] + g.k[j].powi(3)) * g.gamma_dot_nu[j]);
        prop_assert!((key + g.energy).abs() <= 1e-8 * g.energy);
        let lin = g.integrate_with(|j| g.k[j] * g.gamma_dot_nu[j]);
        prop_assert!((lin + g.length).abs() <= 1e-10 * g.length);
    }

    #[test]
    fn p_is_bounded_below_by_its_infimum(x in -10.0f64..10.0) {
        prop_assert!(p_poly(x) >= gap::P_MIN - 1e-12);
        prop_assert_eq!(p_poly(x), p_poly(-x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn coercivity_dominates_the_lattice_gap(
        omega in 1i64..=12,
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=24),
    ) {
        let f = trig_poly(&coeffs, 128);
        let (q, l2) = coercivity_parts(&f, omega).unwrap();
        let gap = lattice_gap(omega, default_n_max(omega)).unwrap().lambda_omega;
        prop_assert!(q >= gap * l2 - 1e-8 * l2.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rescaled_flow_preserves_length_and_decreases_e(seed in 0u64..1_000) {
        let c = random_support_curve(seed, 1, 64).unwrap();
        let cfg = FlowConfig::new(FlowMode::Rescaled, Scheme::SemiImplicitSpectral, 0.05)
            .with_dt(1e-4)
            .with_output_every(0.005);
        let series = flow::run(&c, &cfg).unwrap();
        let l0 = series.records[0].length;
        prop_assert!(series.records.iter().all(|r| (r.length - l0).abs() <= 1e-10 * l0));
        let e: Vec<f64> = series.records.iter().map(|r| r.e).collect();
        prop_assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{e:?}");
    }

    #[test]
    fn series_csv_round_trips(seed in 0u64..1_000) {
        let c = random_support_curve(seed, 2, 64).unwrap();
        let cfg = FlowConfig::new(FlowMode::Free, Scheme::SemiImplicitSpectral, 0.002)
            .with_dt(1e-4)
            .with_output_every(5e-4);
        let series = flow::run(&c, &cfg).unwrap();
        let text = series_csv(&series.records);
        prop_assert_eq!(parse_series_csv(&text).unwrap(), series.records);
    }
}
