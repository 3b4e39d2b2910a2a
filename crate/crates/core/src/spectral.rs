//! Trigonometric (Fourier) machinery on uniform periodic grids.
//!
//! Every grid here samples `[0, 2π)` at `u_j = 2πj/n`. Derivatives are with
//! respect to `u`; callers rescale for other periods. Odd derivatives drop
//! the Nyquist mode, even derivatives keep it.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Forward transform normalised so that `v_j = Σ c_n e^{i n u_j}`.
pub fn forward(data: &mut [Complex64]) {
    let n = data.len();
    plan(n, false).process(data);
    let scale = 1.0 / n as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

/// Inverse of [`forward`].
pub fn inverse(data: &mut [Complex64]) {
    let n = data.len();
    plan(n, true).process(data);
}

/// Signed wavenumber of FFT slot `j` on an `n`-point grid. The Nyquist slot
/// reports `+n/2`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Normalised Fourier coefficients of real samples.
pub fn spectrum(values: &[f64]) -> Vec<Complex64> {
    let mut data = to_complex(values);
    forward(&mut data);
    data
}

fn apply_derivative(coeffs: &mut [Complex64], order: u32) {
    if order == 0 {
        return;
    }
    let n = coeffs.len();
    let i_pow = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    for (j, c) in coeffs.iter_mut().enumerate() {
        if !order.is_multiple_of(2) && n.is_multiple_of(2) && j == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = wavenumber(j, n);
        *c *= i_pow * k.powi(order as i32);
    }
}

/// `order`-th derivative in `u` of real periodic samples.
pub fn derivative(values: &[f64], order: u32) -> Vec<f64> {
    let mut data = to_complex(values);
    forward(&mut data);
    apply_derivative(&mut data, order);
    inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

/// `order`-th derivative in `u` of complex periodic samples.
pub fn derivative_complex(values: &[Complex64], order: u32) -> Vec<Complex64> {
    let mut data = values.to_vec();
    forward(&mut data);
    apply_derivative(&mut data, order);
    inverse(&mut data);
    data
}

/// Several derivatives of one complex field from a single forward transform.
pub fn derivatives_complex(values: &[Complex64], orders: &[u32]) -> Vec<Vec<Complex64>> {
    let mut coeffs = values.to_vec();
    forward(&mut coeffs);
    orders
        .iter()
        .map(|&order| {
            let mut d = coeffs.clone();
            apply_derivative(&mut d, order);
            inverse(&mut d);
            d
        })
        .collect()
}

/// Zero every coefficient smaller than `rel` times the largest one (Krasny
/// filter), so round-off is not amplified by differentiation.
fn truncate_small(coeffs: &mut [Complex64], rel: f64) {
    let cut = rel * coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    for c in coeffs.iter_mut() {
        if c.norm() < cut {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// As [`derivatives_complex`], with coefficients below `rel` times the
/// largest one discarded first. Order 0 returns the filtered field.
pub fn filtered_derivatives_complex(values: &[Complex64], orders: &[u32], rel: f64) -> Vec<Vec<Complex64>> {
    let mut coeffs = values.to_vec();
    forward(&mut coeffs);
    truncate_small(&mut coeffs, rel);
    orders
        .iter()
        .map(|&order| {
            let mut d = coeffs.clone();
            apply_derivative(&mut d, order);
            inverse(&mut d);
            d
        })
        .collect()
}

/// Real counterpart of [`filtered_derivatives_complex`].
pub fn filtered_derivatives(values: &[f64], orders: &[u32], rel: f64) -> Vec<Vec<f64>> {
    filtered_derivatives_complex(&to_complex(values), orders, rel)
        .into_iter()
        .map(|d| d.into_iter().map(|c| c.re).collect())
        .collect()
}

/// Re-grid normalised coefficients from `coeffs.len()` to `m` slots, padding
/// with zeros or truncating. A Nyquist coefficient is split evenly when
/// padding and dropped when truncating.
pub fn regrid_coefficients(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let keep = n.min(m);
    let half = keep / 2;
    for (j, &c) in coeffs.iter().enumerate() {
        let k = wavenumber(j, n);
        let ka = k.abs() as usize;
        if ka < half || (!keep.is_multiple_of(2) && ka == half) {
            let slot = if k >= 0.0 { ka } else { m - ka };
            out[slot] += c;
        } else if ka == half && m > n && n.is_multiple_of(2) {
            // split the Nyquist mode of the coarse grid across ±n/2
            out[half] += c * 0.5;
            out[m - half] += c * 0.5;
        }
    }
    out
}

/// Band-limited interpolation of real samples onto an `m`-point grid.
pub fn resample(values: &[f64], m: usize) -> Vec<f64> {
    let coeffs = spectrum(values);
    let mut data = regrid_coefficients(&coeffs, m);
    inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

/// Band-limited interpolation of complex samples onto an `m`-point grid.
pub fn resample_complex(values: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut coeffs = values.to_vec();
    forward(&mut coeffs);
    let mut data = regrid_coefficients(&coeffs, m);
    inverse(&mut data);
    data
}

/// Pointwise product of the given fields, formed on a grid padded to twice
/// the input size and truncated back. Exact for cubic products of fields
/// band-limited below `n/3`, and alias-free up to mode `n/2` for quadratic ones.
pub fn dealiased_product(factors: &[&[f64]]) -> Vec<f64> {
    assert!(!factors.is_empty());
    let n = factors[0].len();
    let m = 2 * n;
    let mut product = vec![1.0; m];
    for f in factors {
        debug_assert_eq!(f.len(), n);
        let fine = resample(f, m);
        for (p, v) in product.iter_mut().zip(fine) {
            *p *= v;
        }
    }
    let mut coeffs = to_complex(&product);
    forward(&mut coeffs);
    let mut data = regrid_coefficients(&coeffs, n);
    inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

/// Mean of samples. On a uniform periodic grid this is the trapezoidal rule
/// divided by the period.
#[inline]
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Trapezoidal integral over one period of length `period`.
#[inline]
pub fn integrate(values: &[f64], period: f64) -> f64 {
    mean(values) * period
}

/// Periodic antiderivative (zero mean) of mean-free real samples, in `u`.
/// The caller is responsible for removing the mean beforehand.
pub fn antiderivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut data = to_complex(values);
    forward(&mut data);
    data[0] = Complex64::new(0.0, 0.0);
    for (j, c) in data.iter_mut().enumerate().skip(1) {
        if n.is_multiple_of(2) && j == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = wavenumber(j, n);
        *c /= Complex64::new(0.0, k);
    }
    inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

/// Continuous trigonometric interpolant of complex periodic samples,
/// evaluable anywhere on the circle.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    /// `(wavenumber, coefficient)` pairs, Nyquist split symmetrically.
    modes: Vec<(f64, Complex64)>,
}

impl TrigInterpolant {
    pub fn from_complex(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut coeffs = values.to_vec();
        forward(&mut coeffs);
        let mut modes = Vec::with_capacity(n + 1);
        for (j, &c) in coeffs.iter().enumerate() {
            let k = wavenumber(j, n);
            if n.is_multiple_of(2) && j == n / 2 {
                modes.push((k, c * 0.5));
                modes.push((-k, c * 0.5));
            } else {
                modes.push((k, c));
            }
        }
        Self { modes }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::from_complex(&to_complex(values))
    }

    /// Value and first `u`-derivative at `u`.
    pub fn eval_with_derivative(&self, u: f64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut slope = Complex64::new(0.0, 0.0);
        for &(k, c) in &self.modes {
            let phase = Complex64::from_polar(1.0, k * u);
            let term = c * phase;
            value += term;
            slope += term * Complex64::new(0.0, k);
        }
        (value, slope)
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        self.eval_with_derivative(u).0
    }
}

/// Uniform grid `u_j = 2πj/n`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_trig_polynomial_is_exact() {
        let u = grid(32);
        let f: Vec<f64> = u.iter().map(|&x| (3.0 * x).sin() + 0.5 * (5.0 * x).cos()).collect();
        let d1: Vec<f64> = u
            .iter()
            .map(|&x| 3.0 * (3.0 * x).cos() - 2.5 * (5.0 * x).sin())
            .collect();
        let d2: Vec<f64> = u
            .iter()
            .map(|&x| -9.0 * (3.0 * x).sin() - 12.5 * (5.0 * x).cos())
            .collect();
        assert!(max_abs_diff(&derivative(&f, 1), &d1) < 1e-12);
        assert!(max_abs_diff(&derivative(&f, 2), &d2) < 1e-11);
    }

    #[test]
    fn resample_round_trip() {
        let u = grid(16);
        let f: Vec<f64> = u.iter().map(|&x| (2.0 * x).cos() + (x).sin()).collect();
        let up = resample(&f, 64);
        let back = resample(&up, 16);
        assert!(max_abs_diff(&f, &back) < 1e-13);
        let u64 = grid(64);
        let exact: Vec<f64> = u64.iter().map(|&x| (2.0 * x).cos() + (x).sin()).collect();
        assert!(max_abs_diff(&up, &exact) < 1e-13);
    }

    #[test]
    fn dealiased_cube_matches_exact_band_limited_cube() {
        // cos^3 x has modes 1 and 3 only
        let u = grid(16);
        let f: Vec<f64> = u.iter().map(|&x| x.cos()).collect();
        let cube = dealiased_product(&[&f, &f, &f]);
        let exact: Vec<f64> = u.iter().map(|&x| x.cos().powi(3)).collect();
        assert!(max_abs_diff(&cube, &exact) < 1e-13);
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let u = grid(32);
        let f: Vec<f64> = u.iter().map(|&x| (4.0 * x).sin() - (x).cos()).collect();
        let back = antiderivative(&derivative(&f, 1));
        assert!(max_abs_diff(&f, &back) < 1e-12);
    }

    #[test]
    fn interpolant_reproduces_off_grid_values() {
        let u = grid(24);
        let f: Vec<f64> = u.iter().map(|&x| (2.0 * x).sin() + 0.3).collect();
        let it = TrigInterpolant::from_real(&f);
        for &x in &[0.1, 1.234, 5.9] {
            let (v, d) = it.eval_with_derivative(x);
            assert!((v.re - ((2.0 * x).sin() + 0.3)).abs() < 1e-13);
            assert!((d.re - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-13);
        }
    }
}
