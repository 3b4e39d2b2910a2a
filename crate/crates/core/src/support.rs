//! Normal-angle gauge for strictly convex curves: support function,
//! radius of curvature, translation amplitudes and the distance to the
//! centred unit ω-circle.
//!
//! Here the normal angle `ϑ` indexes the outward normal `(cos ϑ, sin ϑ)`, so
//! the centred unit ω-circle has `h ≡ 1`.

use std::f64::consts::{FRAC_PI_2, PI};

use rustfft::num_complex::Complex64;

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::geometry::{compute_geometry, GeometricData};
use crate::spectral::{self, TrigInterpolant};

/// Tolerance of the monotone inversion `u ↦ ϑ(u)`, in radians.
const INVERSION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SupportDecomposition {
    pub omega: i64,
    /// Uniform normal-angle grid `ϑ_i = 2πω i / M`.
    pub angles: Vec<f64>,
    pub h: Vec<f64>,
    pub h_theta: Vec<f64>,
    /// `ρ = h + h_ϑϑ`
    pub rho: Vec<f64>,
    /// Curvature interpolated to the `ϑ` grid.
    pub curvature: Vec<f64>,
    /// `g = h − 1`
    pub g: Vec<f64>,
    pub mean_g: f64,
    pub a1: f64,
    pub a2: f64,
    /// `g` with its mean and first harmonics removed.
    pub w: Vec<f64>,
    /// Curve positions at the `ϑ` grid.
    pub positions: Vec<[f64; 2]>,
}

impl SupportDecomposition {
    pub fn period(&self) -> f64 {
        2.0 * PI * self.omega as f64
    }

    /// `∫ f dϑ` over `[0, 2πω)`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        spectral::integrate(f, self.period())
    }

    /// `|a| = √(a₁² + a₂²)`
    pub fn translation_amplitude(&self) -> f64 {
        self.a1.hypot(self.a2)
    }

    /// `‖w‖_{L²(dϑ)}`
    pub fn w_norm(&self) -> f64 {
        self.integrate(&self.w.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
    }

    /// `(∫ (h−1)² + h_ϑ² dϑ)^{1/2}`
    pub fn support_proxy(&self) -> f64 {
        let f: Vec<f64> = self
            .g
            .iter()
            .zip(&self.h_theta)
            .map(|(g, ht)| g * g + ht * ht)
            .collect();
        self.integrate(&f).sqrt()
    }

    /// `‖γ(ϑ) − (cos ϑ, sin ϑ)‖_{L²(dϑ)}` from the sampled positions.
    pub fn raw_distance(&self) -> f64 {
        let f: Vec<f64> = self
            .positions
            .iter()
            .zip(&self.angles)
            .map(|(p, &t)| (p[0] - t.cos()).powi(2) + (p[1] - t.sin()).powi(2))
            .collect();
        self.integrate(&f).sqrt()
    }
}

/// Support decomposition of a strictly convex curve. A clockwise curve is
/// reversed first.
pub fn support_decomposition(curve: &ClosedCurve) -> Result<SupportDecomposition> {
    let geom = compute_geometry(curve)?;
    if geom.k.iter().all(|&k| k < 0.0) {
        let reversed = curve.reversed();
        let geom = compute_geometry(&reversed)?;
        return decompose(&reversed, &geom);
    }
    decompose(curve, &geom)
}

/// As [`support_decomposition`], reusing already computed geometry.
pub fn decompose(curve: &ClosedCurve, geom: &GeometricData) -> Result<SupportDecomposition> {
    if let Some((index, &curvature)) = geom.k.iter().enumerate().find(|(_, &k)| !(k > 0.0)) {
        return Err(Error::NotConvex { index, curvature });
    }
    let n = curve.n_samples();
    let omega = geom.turning_number;
    if omega < 1 {
        return Err(Error::NotConvex { index: 0, curvature: geom.k[0] });
    }
    let w = omega as f64;
    let period = 2.0 * PI * w;

    // outward normal angle ϑ = θ − π/2, unwrapped and shifted so ϑ(0) ∈ [0, 2π)
    let mut theta = Vec::with_capacity(n);
    let mut prev = 0.0;
    for (j, t) in geom.tangent.iter().enumerate() {
        let a = t[1].atan2(t[0]) - FRAC_PI_2;
        let v = if j == 0 {
            a.rem_euclid(2.0 * PI)
        } else {
            let mut d = a - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            theta[j - 1] + d
        };
        prev = a;
        theta.push(v);
    }
    let u = spectral::grid(n);
    let periodic: Vec<f64> = theta.iter().zip(&u).map(|(t, u)| t - w * u).collect();
    let phase = TrigInterpolant::from_real(&periodic);
    let position = TrigInterpolant::from_complex(&curve.to_complex());
    let curvature_fn = TrigInterpolant::from_real(&geom.k);
    let theta_at = |x: f64| {
        let (p, dp) = phase.eval_with_derivative(x);
        (w * x + p.re, w + dp.re)
    };

    let m = n;
    let start = theta[0];
    let mut angles = Vec::with_capacity(m);
    let mut h = Vec::with_capacity(m);
    let mut h_theta = Vec::with_capacity(m);
    let mut curvature = Vec::with_capacity(m);
    let mut positions = Vec::with_capacity(m);
    for i in 0..m {
        let target_angle = period * i as f64 / m as f64;
        let target = if target_angle < start { target_angle + period } else { target_angle };
        // bracket from the samples, then safeguarded Newton
        let j = theta.partition_point(|&t| t <= target).saturating_sub(1);
        let (mut lo, mut hi) = (u[j], if j + 1 < n { u[j + 1] } else { 2.0 * PI });
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let (val, slope) = theta_at(x);
            let f = val - target;
            if f.abs() < INVERSION_TOLERANCE {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - f / slope;
            x = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 {
                break;
            }
        }
        let p: Complex64 = position.eval(x);
        let (s, c) = target_angle.sin_cos();
        angles.push(target_angle);
        h.push(p.re * c + p.im * s);
        h_theta.push(-p.re * s + p.im * c);
        curvature.push(curvature_fn.eval(x).re);
        positions.push([p.re, p.im]);
    }

    let h_tt: Vec<f64> = spectral::derivative(&h, 2).into_iter().map(|d| d / (w * w)).collect();
    let rho: Vec<f64> = h.iter().zip(&h_tt).map(|(a, b)| a + b).collect();
    let g: Vec<f64> = h.iter().map(|v| v - 1.0).collect();
    let mean_g = spectral::mean(&g);
    let a1 = 2.0 * spectral::mean(&h.iter().zip(&angles).map(|(v, t)| v * t.cos()).collect::<Vec<_>>());
    let a2 = 2.0 * spectral::mean(&h.iter().zip(&angles).map(|(v, t)| v * t.sin()).collect::<Vec<_>>());
    let wres: Vec<f64> = g
        .iter()
        .zip(&angles)
        .map(|(v, t)| v - mean_g - a1 * t.cos() - a2 * t.sin())
        .collect();

    Ok(SupportDecomposition {
        omega,
        angles,
        h,
        h_theta,
        rho,
        curvature,
        g,
        mean_g,
        a1,
        a2,
        w: wres,
        positions,
    })
}

/// Distance of a convex curve of turning number `omega` to the centred unit
/// ω-circle. Returns `(raw, support_proxy)`.
pub fn distance_to_omega_circle(curve: &ClosedCurve, omega: i64) -> Result<(f64, f64)> {
    let dec = support_decomposition(curve)?;
    if dec.omega != omega {
        return Err(Error::InvalidArgument(format!(
            "curve has turning number {}, not {omega}",
            dec.omega
        )));
    }
    Ok((dec.raw_distance(), dec.support_proxy()))
}

/// Rebuild a curve on the `ϑ` grid from its support function through
/// `γ = h ν + h_ϑ t`.
pub fn reconstruct(dec: &SupportDecomposition) -> Vec<[f64; 2]> {
    dec.angles
        .iter()
        .zip(dec.h.iter().zip(&dec.h_theta))
        .map(|(&t, (&h, &ht))| {
            let (s, c) = t.sin_cos();
            [h * c - ht * s, h * s + ht * c]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{perturbed_omega_circle, Scenario};

    #[test]
    fn centred_unit_circle() {
        let c: ClosedCurve = "circle".parse::<Scenario>().unwrap().build(64).unwrap();
        let d = support_decomposition(&c).unwrap();
        assert!(d.h.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(d.a1.abs() < 1e-12 && d.a2.abs() < 1e-12);
        assert!(d.w_norm() < 1e-12);
        assert!(d.rho.iter().all(|&r| (r - 1.0).abs() < 1e-10));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let c = "translated_circle:0.1,0".parse::<Scenario>().unwrap().build(64).unwrap();
        let d = support_decomposition(&c.reversed()).unwrap();
        assert!((d.a1 - 0.1).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_convex_curve() {
        let c = "figure_eight".parse::<Scenario>().unwrap().build(64).unwrap();
        assert!(matches!(support_decomposition(&c), Err(Error::NotConvex { .. })));
        let wavy = ClosedCurve::from_fn(128, |u| {
            let r = 1.0 + 0.2 * (5.0 * u).cos();
            [r * u.cos(), r * u.sin()]
        })
        .unwrap();
        assert!(matches!(support_decomposition(&wavy), Err(Error::NotConvex { .. })));
    }

    #[test]
    fn rho_times_curvature_is_one() {
        let c = perturbed_omega_circle(2, 3, 5e-2, 0.3, 128).unwrap();
        let d = support_decomposition(&c).unwrap();
        for (r, k) in d.rho.iter().zip(&d.curvature) {
            assert!((r * k - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn distance_requires_matching_turning_number() {
        let c = "omega_circle:2".parse::<Scenario>().unwrap().build(64).unwrap();
        assert!(distance_to_omega_circle(&c, 1).is_err());
        let (raw, proxy) = distance_to_omega_circle(&c, 2).unwrap();
        assert!(raw < 1e-10 && proxy < 1e-10);
    }
}
