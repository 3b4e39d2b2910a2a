use elastic_core::experiments::*;
use elastic_core::gap::P_MIN;

#[test]
fn mode_decay_is_deterministic() {
    let p = ModeDecayParams::new(3, 4, 1e-3);
    let a = mode_decay_experiment(&p).unwrap();
    let b = mode_decay_experiment(&p).unwrap();
    let csv = |r: &ModeDecayReport| r.series.as_ref().unwrap().to_csv();
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn measured_rates_exceed_the_gap() {
    for (w, m) in [(2u32, 3u32), (4, 5), (5, 6)] {
        let r = mode_decay_experiment(&ModeDecayParams::new(w, m, 1e-3)).unwrap();
        let rate = r.fit.conclusive_rate().expect("conclusive fit");
        assert!(rate > P_MIN, "(ω={w}, m={m}) rate {rate}");
        assert!(rate >= r.lambda_omega * 0.97, "(ω={w}, m={m}) rate {rate} vs gap {}", r.lambda_omega);
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn distance_decays_at_half_the_e_rate_for_shape_data() {
    let mut p = MainTheoremParams::new(3, 4, 1e-3, [0.0, 0.0]);
    p.n_samples = 64;
    p.t_end = 3.0;
    let r = main_theorem_experiment(&p).unwrap();
    let e = r.e_fit.conclusive_rate().unwrap();
    let d = r.dist_fit.conclusive_rate().unwrap();
    assert!((d - e / 2.0).abs() <= 0.05 * e / 2.0, "dist {d} vs e/2 {}", e / 2.0);
    assert!(r.passed);
}

#[test]
fn small_mode_at_omega_one_has_large_margin() {
    let mut p = MainTheoremParams::new(1, 2, 1e-3, [0.0, 0.0]);
    p.n_samples = 64;
    p.dt = 1e-5;
    p.t_end = 0.5;
    p.outputs = 200;
    let r = main_theorem_experiment(&p).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.e_bound_worst_ratio < 0.6);
}

#[test]
fn translation_rate_does_not_depend_on_omega() {
    let rates: Vec<f64> = [1u32, 2, 3]
        .iter()
        .map(|&w| {
            let r = translation_decay_experiment(&TranslationParams::new(w, [0.05, 0.0])).unwrap();
            r.fit.unwrap().conclusive_rate().unwrap()
        })
        .collect();
    for r in &rates {
        assert!((r - rates[0]).abs() <= 0.03 * rates[0], "{rates:?}");
    }
}

#[test]
fn centred_circle_has_nothing_to_fit() {
    let r = translation_decay_experiment(&TranslationParams::new(1, [0.0, 0.0])).unwrap();
    assert!(r.fit.is_none());
    assert!(r.max_amplitude <= 1e-10);
    assert!(r.passed);
}

#[test]
fn unrescaled_flow_rounds_out_the_ellipse() {
    let run = |n| {
        let mut p = UnrescaledParams::new("ellipse:1.1,1");
        p.n_samples = n;
        unrescaled_asymptotics_experiment(&p).unwrap()
    };
    let (coarse, fine) = (run(64), run(128));
    assert!(coarse.eventually_decreasing && coarse.length_increasing);
    assert!(coarse.final_k_osc < coarse.initial_k_osc);
    let (a, b) = (coarse.loglog_exponent.unwrap(), fine.loglog_exponent.unwrap());
    assert!(a.is_finite() && (a - b).abs() <= 1e-3 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn unrescaled_perturbed_double_circle_lengthens() {
    let r = unrescaled_asymptotics_experiment(&UnrescaledParams::new("perturbed:omega=2,m=3,eps=1e-2")).unwrap();
    assert!(r.length_increasing);
    assert!(r.final_k_osc < r.initial_k_osc);
    assert!(r.passed, "{r:?}");
}

#[test]
fn unrescaled_circle_stays_round() {
    let r = unrescaled_asymptotics_experiment(&UnrescaledParams::new("circle")).unwrap();
    assert!(r.initial_k_osc <= 1e-20 && r.final_k_osc <= 1e-20);
}
