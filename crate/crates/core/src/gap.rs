//! Spectral constants of the linearised rescaled flow about the ω-circle:
//! the quartic symbol `p(x) = 4x⁴ − 10x² + 8`, its minimum over the lattice
//! `x = n/ω`, and the coercivity form it bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Infimum of `p` over the real line, attained at `x = √5/2`.
pub const P_MIN: f64 = 7.0 / 4.0;

/// Quartic symbol of the linearised decay of `e`.
#[inline]
pub fn p_poly(x: f64) -> f64 {
    let x2 = x * x;
    4.0 * x2 * x2 - 10.0 * x2 + 8.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub omega: i64,
    /// `min_{n ∈ ℤ} p(n/ω)`
    pub lambda_omega: f64,
    /// Positive lattice index attaining the minimum.
    pub argmin_n: i64,
    /// `λ_ω − 7/4`
    pub delta_omega: f64,
    /// `min p(n/ω)` over `n ∉ {0, ±ω}`: the slowest curvature mode that is
    /// neither forbidden by the length constraint nor a translation.
    pub realizable_gap: f64,
    pub realizable_argmin_n: i64,
    /// `min |1 − (n/ω)²|` over `n ∉ {0, ±ω}`
    pub mu_omega: f64,
    pub n_max_scanned: i64,
}

/// Default enumeration window. `p` increases beyond `√5/2`, so every
/// candidate minimiser satisfies `|n/ω| ≤ 2`.
pub fn default_n_max(omega: i64) -> i64 {
    (2 * omega).max(4)
}

/// Exhaustive lattice minimum of `p(n/ω)` over `|n| ≤ n_max`.
pub fn lattice_gap(omega: i64, n_max: i64) -> Result<SpectralReport> {
    if omega < 1 {
        return Err(Error::InvalidArgument(format!("omega must be at least 1, got {omega}")));
    }
    let required = 2 * omega;
    if n_max < required {
        return Err(Error::ScanWindowTooSmall { given: n_max, required });
    }
    let w = omega as f64;
    let (mut lambda, mut argmin) = (f64::INFINITY, 0);
    let (mut realizable, mut realizable_n) = (f64::INFINITY, 0);
    let mut mu = f64::INFINITY;
    // p is even, so n ≥ 0 suffices; the smallest index wins ties
    for n in 0..=n_max {
        let x = n as f64 / w;
        let p = p_poly(x);
        if p < lambda {
            lambda = p;
            argmin = n;
        }
        if n != 0 && n != omega {
            if p < realizable {
                realizable = p;
                realizable_n = n;
            }
            mu = mu.min((1.0 - x * x).abs());
        }
    }
    Ok(SpectralReport {
        omega,
        lambda_omega: lambda,
        argmin_n: argmin,
        delta_omega: lambda - P_MIN,
        realizable_gap: realizable,
        realizable_argmin_n: realizable_n,
        mu_omega: mu,
        n_max_scanned: n_max,
    })
}

/// Reports for every ω in `range`, each with its default window.
pub fn gap_table(range: std::ops::RangeInclusive<i64>) -> Result<Vec<SpectralReport>> {
    let omegas: Vec<i64> = range.collect();
    crate::batch::map(&omegas, |&w| lattice_gap(w, default_n_max(w)))
        .into_iter()
        .collect()
}

/// `Q(f) = 4∫f_ss² − 10∫f_s² + 8∫f²` for mean-zero samples `f` on the
/// circle of length `2πω`.
pub fn coercivity_form(f: &[f64], omega: i64) -> Result<f64> {
    let (q, _) = coercivity_parts(f, omega)?;
    Ok(q)
}

/// `(Q(f), ∫f²)`.
pub fn coercivity_parts(f: &[f64], omega: i64) -> Result<(f64, f64)> {
    if omega < 1 {
        return Err(Error::InvalidArgument(format!("omega must be at least 1, got {omega}")));
    }
    let scale = f.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mean = spectral::mean(f);
    if mean.abs() > 1e-10 * scale {
        return Err(Error::NonZeroMean { mean });
    }
    let w = omega as f64;
    let period = 2.0 * PI * w;
    // s = ω u, so ∂_s = ω⁻¹ ∂_u
    let f_s: Vec<f64> = spectral::derivative(f, 1).into_iter().map(|d| d / w).collect();
    let f_ss: Vec<f64> = spectral::derivative(f, 2).into_iter().map(|d| d / (w * w)).collect();
    let sq = |v: &[f64]| spectral::integrate(&v.iter().map(|x| x * x).collect::<Vec<_>>(), period);
    let l2 = sq(f);
    Ok((4.0 * sq(&f_ss) - 10.0 * sq(&f_s) + 8.0 * l2, l2))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: p at a rational point `num/den` in exact integer
    /// arithmetic, `(4 num⁴ − 10 num² den² + 8 den⁴) / den⁴`.
    fn p_rational(num: i128, den: i128) -> (i128, i128) {
        let (n2, d2) = (num * num, den * den);
        (4 * n2 * n2 - 10 * n2 * d2 + 8 * d2 * d2, d2 * d2)
    }

    fn as_f64((a, b): (i128, i128)) -> f64 {
        a as f64 / b as f64
    }

    #[test]
    fn p_poly_values() {
        assert_eq!(p_poly(0.0), 8.0);
        assert!((p_poly(5.0_f64.sqrt() / 2.0) - 1.75).abs() < 1e-15);
        assert_eq!(p_poly(1.0), 2.0);
        assert_eq!(p_poly(2.0), 32.0);
        assert_eq!(p_rational(4, 3), (232, 81));
        assert!((p_poly(4.0 / 3.0) - 2.86420).abs() < 1e-5);
        assert!((p_poly(4.0 / 3.0) - as_f64(p_rational(4, 3))).abs() < 1e-14);
        assert_eq!(p_rational(10, 9), (11488, 6561));
        assert!((p_poly(10.0 / 9.0) - as_f64(p_rational(10, 9))).abs() < 1e-14);
    }

    /// Brute-force lattice minimum over a generous window.
    fn brute_min(omega: i64) -> (f64, i64) {
        (-(10 * omega)..=(10 * omega))
            .map(|n| (as_f64(p_rational(n as i128, omega as i128)), n.abs()))
            .fold((f64::INFINITY, 0), |best, c| if c.0 < best.0 { c } else { best })
    }

    #[test]
    fn documented_gaps() {
        let r1 = lattice_gap(1, 4).unwrap();
        assert_eq!((r1.lambda_omega, r1.argmin_n), (2.0, 1));
        assert_eq!(r1.realizable_gap, 32.0);
        assert_eq!(r1.mu_omega, 3.0);

        let r3 = lattice_gap(3, default_n_max(3)).unwrap();
        assert_eq!((r3.lambda_omega, r3.argmin_n), (2.0, 3));
        assert!((r3.realizable_gap - 232.0 / 81.0).abs() < 1e-14);
        assert_eq!(r3.realizable_argmin_n, 4);
        assert!((r3.mu_omega - 5.0 / 9.0).abs() < 1e-15);

        let r9 = lattice_gap(9, default_n_max(9)).unwrap();
        assert_eq!(r9.argmin_n, 10);
        assert!((r9.lambda_omega - 11488.0 / 6561.0).abs() < 1e-14);
    }

    #[test]
    fn window_must_contain_minimiser() {
        assert!(matches!(
            lattice_gap(5, 9),
            Err(Error::ScanWindowTooSmall { given: 9, required: 10 })
        ));
    }

    #[test]
    fn gap_matches_brute_force_and_bounds() {
        for omega in 1..=50 {
            let r = lattice_gap(omega, default_n_max(omega)).unwrap();
            let (brute, n) = brute_min(omega);
            assert!((r.lambda_omega - brute).abs() < 1e-13, "omega {omega}");
            assert_eq!(r.argmin_n, n, "omega {omega}");
            assert!(r.lambda_omega > P_MIN && r.lambda_omega <= 2.0);
            assert!(r.mu_omega > 0.0);
        }
    }

    #[test]
    fn gap_shrinks_along_multiples() {
        let deltas: Vec<f64> = (1..=6)
            .map(|j| lattice_gap(9 * j, default_n_max(9 * j)).unwrap().delta_omega)
            .collect();
        assert!(deltas.windows(2).all(|w| w[1] <= w[0]));
        let far = lattice_gap(900, default_n_max(900)).unwrap();
        assert!(far.delta_omega < 1e-4);
        for omega in 1..=12 {
            let base = lattice_gap(omega, default_n_max(omega)).unwrap().lambda_omega;
            for mult in 2..=4 {
                let w = omega * mult;
                assert!(lattice_gap(w, default_n_max(w)).unwrap().lambda_omega <= base + 1e-15);
            }
        }
    }

    #[test]
    fn p_is_even_and_increasing_past_minimiser() {
        let x0 = 5.0_f64.sqrt() / 2.0;
        let xs: Vec<f64> = (0..2000).map(|i| x0 + i as f64 * 1e-3).collect();
        assert!(xs.windows(2).all(|w| p_poly(w[1]) > p_poly(w[0])));
        for &x in &xs {
            assert_eq!(p_poly(x), p_poly(-x));
        }
    }

    fn single_mode(n_grid: usize, n: f64) -> Vec<f64> {
        spectral::grid(n_grid).iter().map(|&u| (n * u).cos()).collect()
    }

    #[test]
    fn coercivity_form_single_modes() {
        // cos s on the length-2π circle: Q = p(1)·π
        let q1 = coercivity_form(&single_mode(64, 1.0), 1).unwrap();
        assert!((q1 - 2.0 * PI).abs() < 1e-12);
        let q2 = coercivity_form(&single_mode(64, 2.0), 1).unwrap();
        assert!((q2 - 32.0 * PI).abs() < 1e-10);
        assert_eq!(coercivity_form(&vec![0.0; 64], 1).unwrap(), 0.0);
    }

    #[test]
    fn argmin_mode_attains_the_gap() {
        for omega in [1, 3, 9, 14] {
            let r = lattice_gap(omega, default_n_max(omega)).unwrap();
            // mode n/ω on the length-2πω circle is u-frequency n
            let f = single_mode(128, r.argmin_n as f64);
            let (q, l2) = coercivity_parts(&f, omega).unwrap();
            assert!((q / l2 - r.lambda_omega).abs() < 1e-10, "omega {omega}");
        }
    }

    #[test]
    fn coercivity_rejects_nonzero_mean() {
        let f = vec![0.1; 32];
        assert!(matches!(coercivity_form(&f, 1), Err(Error::NonZeroMean { .. })));
    }
}
