//! Frenet frame, curvature and its arclength derivatives, and the scalar
//! functionals of a sampled closed curve.
//!
//! Sign convention: `ν` is `τ` rotated by `+π/2`. A counter-clockwise circle
//! has `k > 0` and inward `ν`, so `γ·ν = −ρ₀` on a centred circle.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::spectral;

/// Relative threshold on `|γ_u|` below which a sample counts as singular.
const IMMERSION_TOLERANCE: f64 = 1e-10;

/// Relative level of the round-off filter applied to positions and to `k`
/// before they are differentiated.
pub const ROUNDOFF_FILTER: f64 = 1e-15;

/// Largest rounding residual accepted when reading off the turning number.
pub const TURNING_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct GeometricData {
    /// `|γ_u|` at each sample.
    pub metric: Vec<f64>,
    pub tangent: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
    pub k: Vec<f64>,
    pub k_s: Vec<f64>,
    pub k_ss: Vec<f64>,
    pub k_sss: Vec<f64>,
    /// `γ·ν`
    pub gamma_dot_nu: Vec<f64>,
    /// `γ·τ`
    pub gamma_dot_tau: Vec<f64>,
    pub length: f64,
    pub turning_number: i64,
    /// `|∫k ds / 2π − ω|`
    pub turning_residual: f64,
    /// `k̄ = 2πω / L`
    pub mean_curvature: f64,
    /// `E = ∫k² ds`
    pub energy: f64,
    /// `e = ∫(k − k̄)² ds`
    pub deviation: f64,
    /// `K_osc = L e`
    pub oscillation: f64,
}

impl GeometricData {
    pub fn n_samples(&self) -> usize {
        self.metric.len()
    }

    /// `∫ f ds` by the trapezoidal rule in the parameter.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let du = 2.0 * PI / self.metric.len() as f64;
        f.iter().zip(&self.metric).map(|(v, g)| v * g).sum::<f64>() * du
    }

    /// `∫ f(j) ds` for a per-sample closure.
    pub fn integrate_with(&self, f: impl Fn(usize) -> f64) -> f64 {
        let du = 2.0 * PI / self.metric.len() as f64;
        self.metric.iter().enumerate().map(|(j, g)| f(j) * g).sum::<f64>() * du
    }

    /// Arclength derivative `|γ_u|⁻¹ ∂_u` of a per-sample field.
    pub fn d_ds(&self, f: &[f64]) -> Vec<f64> {
        spectral::derivative(f, 1)
            .into_iter()
            .zip(&self.metric)
            .map(|(d, g)| d / g)
            .collect()
    }

    /// `‖k_s‖² = ∫k_s² ds`
    pub fn ks_norm_sq(&self) -> f64 {
        self.integrate_with(|j| self.k_s[j] * self.k_s[j])
    }

    /// `∫k⁴ ds`
    pub fn k4_integral(&self) -> f64 {
        self.integrate_with(|j| self.k[j].powi(4))
    }

    /// Discrete Frenet residual `max_j |τ_s − kν|`.
    pub fn frenet_residual(&self) -> f64 {
        let tx: Vec<f64> = self.tangent.iter().map(|t| t[0]).collect();
        let ty: Vec<f64> = self.tangent.iter().map(|t| t[1]).collect();
        let (dx, dy) = (self.d_ds(&tx), self.d_ds(&ty));
        (0..self.n_samples())
            .map(|j| {
                let ex = dx[j] - self.k[j] * self.normal[j][0];
                let ey = dy[j] - self.k[j] * self.normal[j][1];
                ex.hypot(ey)
            })
            .fold(0.0, f64::max)
    }
}

/// Full geometric state of a curve by trigonometric differentiation.
pub fn compute_geometry(curve: &ClosedCurve) -> Result<GeometricData> {
    let z = curve.to_complex();
    let n = z.len();
    let mut derivs = spectral::filtered_derivatives_complex(&z, &[1, 2, 3], ROUNDOFF_FILTER).into_iter();
    let z_u = derivs.next().unwrap();
    let z_uu = derivs.next().unwrap();
    let z_uuu = derivs.next().unwrap();

    let metric: Vec<f64> = z_u.iter().map(|c| c.norm()).collect();
    let mean_metric = spectral::mean(&metric);
    if let Some((index, &speed)) = metric
        .iter()
        .enumerate()
        .find(|(_, &g)| !(g > IMMERSION_TOLERANCE * mean_metric))
    {
        return Err(Error::NotImmersed { index, speed });
    }

    let tangent: Vec<Complex64> = z_u.iter().zip(&metric).map(|(c, g)| c / g).collect();
    let normal: Vec<Complex64> = tangent.iter().map(|t| t * Complex64::i()).collect();
    let k_raw: Vec<f64> = (0..n)
        .map(|j| (z_u[j].conj() * z_uu[j]).im / metric[j].powi(3))
        .collect();

    // u-derivatives of k from one filtered spectrum, then the chain rule with
    // g_u = Re(z̄_u z_uu)/g and g_uu = (|z_uu|² + Re(z̄_u z_uuu) − g_u²)/g
    let mut kd = spectral::filtered_derivatives(&k_raw, &[0, 1, 2, 3], ROUNDOFF_FILTER).into_iter();
    let k = kd.next().unwrap();
    let (k_u, k_uu, k_uuu) = (kd.next().unwrap(), kd.next().unwrap(), kd.next().unwrap());
    let mut k_s = Vec::with_capacity(n);
    let mut k_ss = Vec::with_capacity(n);
    let mut k_sss = Vec::with_capacity(n);
    for j in 0..n {
        let g = metric[j];
        let g_u = (z_u[j].conj() * z_uu[j]).re / g;
        let g_uu = (z_uu[j].norm_sqr() + (z_u[j].conj() * z_uuu[j]).re - g_u * g_u) / g;
        k_s.push(k_u[j] / g);
        k_ss.push(k_uu[j] / (g * g) - k_u[j] * g_u / g.powi(3));
        k_sss.push(
            k_uuu[j] / g.powi(3) - 3.0 * k_uu[j] * g_u / g.powi(4) - k_u[j] * g_uu / g.powi(4)
                + 3.0 * k_u[j] * g_u * g_u / g.powi(5),
        );
    }

    let dot = |a: Complex64, b: Complex64| a.re * b.re + a.im * b.im;
    let gamma_dot_nu: Vec<f64> = (0..n).map(|j| dot(z[j], normal[j])).collect();
    let gamma_dot_tau: Vec<f64> = (0..n).map(|j| dot(z[j], tangent[j])).collect();

    let du = 2.0 * PI / n as f64;
    let ds = |j: usize| metric[j] * du;
    let length: f64 = (0..n).map(ds).sum();
    let total_curvature: f64 = (0..n).map(|j| k[j] * ds(j)).sum();
    let winding = total_curvature / (2.0 * PI);
    let turning_number = winding.round() as i64;
    let turning_residual = (winding - turning_number as f64).abs();
    let mean_curvature = 2.0 * PI * turning_number as f64 / length;
    let energy: f64 = (0..n).map(|j| k[j] * k[j] * ds(j)).sum();
    let deviation: f64 = (0..n).map(|j| (k[j] - mean_curvature).powi(2) * ds(j)).sum();

    Ok(GeometricData {
        tangent: tangent.iter().map(|c| [c.re, c.im]).collect(),
        normal: normal.iter().map(|c| [c.re, c.im]).collect(),
        metric,
        k,
        k_s,
        k_ss,
        k_sss,
        gamma_dot_nu,
        gamma_dot_tau,
        length,
        turning_number,
        turning_residual,
        mean_curvature,
        energy,
        deviation,
        oscillation: length * deviation,
    })
}

/// Turning number from the winding of the unit tangent, cross-checked
/// against `∫k ds / 2π`. Returns the integer and its rounding residual.
pub fn turning_number(curve: &ClosedCurve) -> Result<(i64, f64)> {
    let geom = compute_geometry(curve)?;
    let angles: Vec<f64> = geom.tangent.iter().map(|t| t[1].atan2(t[0])).collect();
    let n = angles.len();
    let mut total = 0.0;
    for j in 0..n {
        let mut d = angles[(j + 1) % n] - angles[j];
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        total += d;
    }
    let winding = (total / (2.0 * PI)).round() as i64;
    let spectral_winding = geom.integrate(&geom.k) / (2.0 * PI);
    let residual = (spectral_winding - winding as f64).abs();
    if residual > TURNING_TOLERANCE {
        return Err(Error::Aliasing { residual });
    }
    Ok((winding, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Scenario;

    fn build(spec: &str, n: usize) -> ClosedCurve {
        spec.parse::<Scenario>().unwrap().build(n).unwrap()
    }

    #[test]
    fn unit_circle_values() {
        let g = compute_geometry(&build("circle", 128)).unwrap();
        assert!((g.length - 2.0 * PI).abs() < 1e-13);
        assert!(g.k.iter().all(|&k| (k - 1.0).abs() < 1e-12));
        assert!(g.oscillation <= 1e-12);
        assert!((g.energy - 2.0 * PI).abs() < 1e-12);
        assert_eq!(g.turning_number, 1);
        // inward normal: γ·ν = −1
        assert!(g.gamma_dot_nu.iter().all(|&p| (p + 1.0).abs() < 1e-13));
    }

    #[test]
    fn omega_circle_scaling() {
        let r0 = 1.7;
        let g = compute_geometry(&build("omega_circle:3,1.7", 128)).unwrap();
        assert!((g.length - 6.0 * PI * r0).abs() < 1e-12);
        assert!(g.k.iter().all(|&k| (k - 1.0 / r0).abs() < 1e-12));
        assert!((g.energy - 6.0 * PI / r0).abs() < 1e-12);
        assert_eq!(g.turning_number, 3);
    }

    #[test]
    fn frame_is_orthonormal() {
        let g = compute_geometry(&build("ellipse:2,1", 64)).unwrap();
        for (t, nu) in g.tangent.iter().zip(&g.normal) {
            assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-12);
            assert!((nu[0].hypot(nu[1]) - 1.0).abs() < 1e-12);
            assert!((t[0] * nu[0] + t[1] * nu[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_immersed_curve() {
        // cusp: γ(u) = (cos u, sin u)·(1 − cos u) has γ_u(0) = 0
        let c = ClosedCurve::from_fn(64, |u| {
            let r = 1.0 - u.cos();
            [r * u.cos(), r * u.sin()]
        })
        .unwrap();
        assert!(matches!(compute_geometry(&c), Err(Error::NotImmersed { index: 0, .. })));
    }

    #[test]
    fn clockwise_circle_has_negative_turning_number() {
        let c = build("circle", 32).reversed();
        assert_eq!(turning_number(&c).unwrap().0, -1);
    }

    #[test]
    fn doubly_traversed_circle() {
        assert_eq!(turning_number(&build("omega_circle:2", 64)).unwrap().0, 2);
    }

    #[test]
    fn under_resolved_curve_is_flagged() {
        // a wiggly curve with content far beyond the Nyquist mode of 16 samples
        let fine = ClosedCurve::from_fn(16, |u| {
            let r = 1.0 + 0.3 * (7.0 * u).cos();
            [r * u.cos(), r * u.sin()]
        })
        .unwrap();
        match turning_number(&fine) {
            Err(Error::Aliasing { residual }) => assert!(residual > 1e-3),
            Err(Error::NotImmersed { .. }) => {}
            other => panic!("expected an aliasing diagnosis, got {other:?}"),
        }
    }
}
