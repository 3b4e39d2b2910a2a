//! Numerical checks of the integral identities behind the convergence
//! argument, the second-order expansion of `de/dt` with its remainder
//! ledger, and the interpolation inequalities used to bound it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{support_curve, ClosedCurve, SupportHarmonic};
use crate::error::{Error, Result};
use crate::flow::{self, FlowConfig, FlowMode, FlowState, Scheme, StepSize};
use crate::gap;
use crate::geometry::{compute_geometry, GeometricData};
use crate::spectral;

/// Finite-difference spacings of the flow-based checks; the last one is
/// the one judged.
pub const FD_STEPS: [f64; 2] = [1e-4, 1e-5];
/// Relative tolerance of the flow-based checks.
pub const FD_TOLERANCE: f64 = 0.02;
/// Relative tolerance of the static identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
/// Absolute residual below which a check passes regardless of scale.
pub const ABS_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub n: usize,
    pub curve: String,
    /// Residual after Richardson extrapolation over the spacing ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolated_residual: Option<f64>,
}

impl IdentityReport {
    pub fn new(name: &str, left: f64, right: f64, tolerance: f64, n: usize, curve: &str) -> Self {
        let abs_residual = (left - right).abs();
        let scale = left.abs().max(right.abs());
        let rel_residual = if scale > 0.0 { abs_residual / scale } else { 0.0 };
        let mut r = Self {
            name: name.to_string(),
            left,
            right,
            abs_residual,
            rel_residual,
            tolerance,
            passed: false,
            n,
            curve: curve.to_string(),
            extrapolated_residual: None,
        };
        r.passed = r.passes(tolerance);
        r
    }

    pub fn passes(&self, rel_tolerance: f64) -> bool {
        self.abs_residual.is_finite()
            && (self.abs_residual <= ABS_FLOOR || self.rel_residual <= rel_tolerance)
    }
}

/// `∫(2k_ss + k³)(γ·ν) ds = −∫k² ds`
pub fn check_key_identity(curve: &ClosedCurve, label: &str) -> Result<IdentityReport> {
    let g = compute_geometry(curve)?;
    let left = g.integrate_with(|j| (2.0 * g.k_ss[j] + g.k[j].powi(3)) * g.gamma_dot_nu[j]);
    Ok(IdentityReport::new("key_identity", left, -g.energy, IDENTITY_TOLERANCE, curve.n_samples(), label))
}

/// `∫k (γ·ν) ds = −L`
pub fn check_support_length_identity(curve: &ClosedCurve, label: &str) -> Result<IdentityReport> {
    let g = compute_geometry(curve)?;
    let left = g.integrate_with(|j| g.k[j] * g.gamma_dot_nu[j]);
    Ok(IdentityReport::new("k_gamma_nu", left, -g.length, IDENTITY_TOLERANCE, curve.n_samples(), label))
}

/// `∮τ ds = 0`, reported as the modulus of the integral against zero.
pub fn check_frenet_closure(curve: &ClosedCurve, label: &str) -> Result<IdentityReport> {
    let g = compute_geometry(curve)?;
    let x = g.integrate_with(|j| g.tangent[j][0]);
    let y = g.integrate_with(|j| g.tangent[j][1]);
    Ok(IdentityReport::new("tangent_closure", x.hypot(y), 0.0, IDENTITY_TOLERANCE, curve.n_samples(), label))
}

/// Both static identities on each curve, in parallel.
pub fn identity_suite(curves: &[(String, ClosedCurve)]) -> Result<Vec<IdentityReport>> {
    let per_curve = crate::batch::map(curves, |(label, c)| -> Result<Vec<IdentityReport>> {
        Ok(vec![check_key_identity(c, label)?, check_support_length_identity(c, label)?])
    });
    let mut out = Vec::with_capacity(2 * curves.len());
    for r in per_curve {
        out.extend(r?);
    }
    Ok(out)
}

fn fd_config(mode: FlowMode) -> FlowConfig {
    let mut c = FlowConfig::new(mode, Scheme::ExplicitRk4, 1.0).without_resampling();
    c.dt = Some(StepSize::Auto);
    c.gauge_diagnostics = false;
    c
}

/// States at `t = 0, h, 2h` along the RK4 flow.
fn fd_states(curve: &ClosedCurve, config: &FlowConfig, h: f64) -> Result<[FlowState; 3]> {
    let s0 = FlowState::new(curve.clone(), config.mode)?;
    let s1 = flow::advance(s0.clone(), config, h)?;
    let s2 = flow::advance(s1.clone(), config, 2.0 * h)?;
    Ok([s0, s1, s2])
}

/// Centred difference of `quantity` about `t = h` against `formula(t = h)`,
/// for each spacing in [`FD_STEPS`].
fn fd_check(
    name: &str,
    curve: &ClosedCurve,
    label: &str,
    mode: FlowMode,
    quantity: impl Fn(&GeometricData) -> f64 + Sync,
    formula: impl Fn(&GeometricData) -> f64 + Sync,
) -> Result<IdentityReport> {
    let config = fd_config(mode);
    let pairs = crate::batch::map(&FD_STEPS, |&h| -> Result<(f64, f64)> {
        let [s0, s1, s2] = fd_states(curve, &config, h)?;
        let fd = (quantity(&s2.geometry) - quantity(&s0.geometry)) / (2.0 * h);
        Ok((formula(&s1.geometry), fd))
    });
    let pairs: Vec<(f64, f64)> = pairs.into_iter().collect::<Result<_>>()?;
    let (coarse, fine) = (pairs[0], pairs[1]);
    let ratio = FD_STEPS[0] / FD_STEPS[1];
    let extrapolated = ((ratio * ratio) * (fine.1 - fine.0) - (coarse.1 - coarse.0)) / (ratio * ratio - 1.0);
    let mut r = IdentityReport::new(name, fine.0, fine.1, FD_TOLERANCE, curve.n_samples(), label);
    r.extrapolated_residual = Some(extrapolated.abs());
    Ok(r)
}

fn normalised(curve: &ClosedCurve) -> Result<ClosedCurve> {
    let g = compute_geometry(curve)?;
    Ok(curve.scaled(2.0 * PI * g.turning_number as f64 / g.length))
}

fn squared_speed(g: &GeometricData) -> f64 {
    g.integrate_with(|j| (2.0 * g.k_ss[j] + g.k[j].powi(3)).powi(2))
}

/// `de/dt = −∫(2k_ss + k³)² ds − λ∫k² ds` along the rescaled flow, after
/// normalising the length to `2πω`.
pub fn check_e_evolution(curve: &ClosedCurve, label: &str) -> Result<IdentityReport> {
    let curve = normalised(curve)?;
    fd_check(
        "e_evolution",
        &curve,
        label,
        FlowMode::Rescaled,
        |g| g.deviation,
        |g| -squared_speed(g) - flow::lambda_coefficient(g) * g.energy,
    )
}

/// Right-hand side of the evolution of `‖k_s‖²` under the rescaled flow at
/// `L = 2πω`.
pub fn ks_evolution_rate(g: &GeometricData) -> f64 {
    let omega = g.turning_number as f64;
    let ks2 = g.ks_norm_sq();
    let k4 = g.k4_integral();
    -4.0 * g.integrate_with(|j| g.k_sss[j].powi(2))
        + 10.0 * g.integrate_with(|j| (g.k_ss[j] * g.k[j]).powi(2))
        - 10.0 / 3.0 * g.integrate_with(|j| g.k_s[j].powi(4))
        - 11.0 * g.integrate_with(|j| g.k_s[j].powi(2) * g.k[j].powi(4))
        - 3.0 / (2.0 * omega * PI) * ks2 * (2.0 * ks2 - k4)
}

pub fn check_ks_evolution(curve: &ClosedCurve, label: &str) -> Result<IdentityReport> {
    let curve = normalised(curve)?;
    fd_check("ks_evolution", &curve, label, FlowMode::Rescaled, |g| g.ks_norm_sq(), ks_evolution_rate)
}

/// `dE/dt = −∫(2k_ss + k³)² ds` and `dL/dt = −2∫k_s² ds + ∫k⁴ ds` along the
/// free flow.
pub fn check_dissipation_and_length(curve: &ClosedCurve, label: &str) -> Result<[IdentityReport; 2]> {
    let energy = fd_check("energy_dissipation", curve, label, FlowMode::Free, |g| g.energy, |g| -squared_speed(g))?;
    let length = fd_check(
        "length_law",
        curve,
        label,
        FlowMode::Free,
        |g| g.length,
        |g| -2.0 * g.ks_norm_sq() + g.k4_integral(),
    )?;
    Ok([energy, length])
}

/// Terms of the remainder ledger for `f = k − 1` sampled uniformly in
/// arclength on a curve of length `2πω`. `e = ∫f²`.
pub fn remainder_terms(f: &[f64], omega: i64) -> [f64; 12] {
    let w = omega as f64;
    let l = 2.0 * PI * w;
    let f_s: Vec<f64> = spectral::derivative(f, 1).into_iter().map(|d| d / w).collect();
    let f_ss: Vec<f64> = spectral::derivative(f, 2).into_iter().map(|d| d / (w * w)).collect();
    let int = |g: &dyn Fn(usize) -> f64| spectral::integrate(&(0..f.len()).map(g).collect::<Vec<_>>(), l);
    let e = int(&|j| f[j] * f[j]);
    let f3 = int(&|j| f[j].powi(3));
    let f4 = int(&|j| f[j].powi(4));
    let fs2 = int(&|j| f_s[j] * f_s[j]);
    [
        -12.0 * int(&|j| f[j] * f[j] * f_ss[j]),
        -4.0 * int(&|j| f[j].powi(3) * f_ss[j]),
        -20.0 * f3,
        -15.0 * f4,
        -6.0 * int(&|j| f[j].powi(5)),
        -int(&|j| f[j].powi(6)),
        4.0 * f3,
        f4,
        -(2.0 / l) * e * fs2,
        (6.0 / l) * e * e,
        (4.0 / l) * e * f3,
        (1.0 / l) * e * f4,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionPoint {
    pub eps: f64,
    pub de_dt: f64,
    pub quadratic: f64,
    /// `|de/dt + Q(f)|`
    pub residual: f64,
    /// Sum of the twelve ledger terms.
    pub ledger: f64,
    /// `|de/dt + Q(f) − ledger|`
    pub ledger_mismatch: f64,
    pub ledger_relative: f64,
    pub terms: [f64; 12],
    /// The ninth ledger term is non-positive.
    pub r9_nonpositive: bool,
    /// `−6∫f⁵ − 14∫f⁴ − ∫f⁶ ≤ −5∫f⁴`
    pub quartic_sign_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionProbe {
    pub omega: i64,
    pub modes: Vec<u32>,
    pub n: usize,
    pub points: Vec<ExpansionPoint>,
    /// Least-squares slope of `log residual` against `log ε`; `None` when
    /// the residuals are not monotone in `ε`.
    pub exponent: Option<f64>,
    /// Exponents between consecutive ladder entries.
    pub local_exponents: Vec<f64>,
}

fn expansion_point(omega: i64, modes: &[u32], eps: f64, n: usize) -> Result<ExpansionPoint> {
    let harmonics: Vec<SupportHarmonic> = modes
        .iter()
        .map(|&m| SupportHarmonic { m, amplitude: eps, phase: 0.0 })
        .collect();
    let curve = support_curve(omega as u32, &harmonics, [0.0, 0.0], n)?;
    let curve = normalised(&flow::resample_uniform_arclength(&curve)?)?;
    let g = compute_geometry(&curve)?;
    let de_dt = -squared_speed(&g) - flow::lambda_coefficient(&g) * g.energy;
    let f: Vec<f64> = g.k.iter().map(|k| k - 1.0).collect();
    let q = gap::coercivity_form(&f, omega)?;
    let terms = remainder_terms(&f, omega);
    let ledger: f64 = terms.iter().sum();
    let lhs = de_dt + q;
    let mismatch = (lhs - ledger).abs();
    let l = 2.0 * PI * omega as f64;
    let int = |p: i32| spectral::integrate(&f.iter().map(|v| v.powi(p)).collect::<Vec<_>>(), l);
    let (f4, f5, f6) = (int(4), int(5), int(6));
    Ok(ExpansionPoint {
        eps,
        de_dt,
        quadratic: q,
        residual: lhs.abs(),
        ledger,
        ledger_mismatch: mismatch,
        ledger_relative: if lhs != 0.0 { mismatch / lhs.abs() } else { 0.0 },
        terms,
        r9_nonpositive: terms[8] <= 0.0,
        quartic_sign_ok: -6.0 * f5 - 14.0 * f4 - f6 <= -5.0 * f4 + 1e-12,
    })
}

/// Expansion of `de/dt` about the unit ω-circle along the family with
/// support modes `modes`, each at amplitude `ε`, for every `ε` in `ladder`.
pub fn check_quadratic_expansion(omega: i64, modes: &[u32], ladder: &[f64], n: usize) -> Result<ExpansionProbe> {
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("ε ladder must be strictly decreasing".into()));
    }
    let points = crate::batch::map(ladder, |&eps| expansion_point(omega, modes, eps, n))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let local_exponents: Vec<f64> = points
        .windows(2)
        .map(|w| (w[0].residual / w[1].residual).ln() / (w[0].eps / w[1].eps).ln())
        .collect();
    let monotone = points.len() >= 2
        && points.iter().all(|p| p.residual > 0.0)
        && points.windows(2).all(|w| w[1].residual < w[0].residual);
    let exponent = monotone.then(|| {
        let xs: Vec<f64> = points.iter().map(|p| p.eps.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.residual.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(ExpansionProbe {
        omega,
        modes: modes.to_vec(),
        n,
        points,
        exponent,
        local_exponents,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `∫f_s² ≤ ‖f‖ ‖f_ss‖`
    Ibp,
    /// `‖f‖∞² ≤ C ‖f‖ ‖f_s‖`
    GnInfinity,
    /// `∫f⁴ ≤ C ‖f‖³ ‖f_s‖`
    L4,
    /// `∫|f|³ ≤ C ‖f‖^{5/2} ‖f_s‖^{1/2}`
    L3,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [Inequality::Ibp, Inequality::GnInfinity, Inequality::L4, Inequality::L3];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Ibp => "ibp",
            Inequality::GnInfinity => "gn_inf",
            Inequality::L4 => "l4",
            Inequality::L3 => "l3",
        }
    }

    /// Constant known in closed form, if any.
    pub fn sharp_constant(self) -> Option<f64> {
        match self {
            Inequality::Ibp => Some(1.0),
            _ => None,
        }
    }
}

/// Oversampling factor for sup norms and non-smooth integrands.
const OVERSAMPLE: usize = 16;
/// Highest Fourier mode of the random family.
const FAMILY_MODES: usize = 12;

/// Mean-zero trigonometric polynomial with `FAMILY_MODES` random modes,
/// coefficients uniform in `[−1, 1]` scaled by `j⁻¹`, sampled on `n` points.
pub fn random_mean_zero(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (1..=FAMILY_MODES)
        .map(|j| {
            let s = 1.0 / j as f64;
            (rng.random_range(-1.0..1.0) * s, rng.random_range(-1.0..1.0) * s)
        })
        .collect();
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

/// Ratio `lhs / rhs` of one inequality for mean-zero samples on the circle
/// of length `2πω`.
pub fn inequality_ratio(f: &[f64], omega: i64, which: Inequality) -> Result<f64> {
    let scale = f.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mean = spectral::mean(f);
    if mean.abs() > 1e-10 * scale {
        return Err(Error::NonZeroMean { mean });
    }
    let w = omega as f64;
    let l = 2.0 * PI * w;
    let norm = |g: &[f64]| spectral::integrate(&g.iter().map(|v| v * v).collect::<Vec<_>>(), l).sqrt();
    let f_s: Vec<f64> = spectral::derivative(f, 1).into_iter().map(|d| d / w).collect();
    let (n0, n1) = (norm(f), norm(&f_s));
    let fine = spectral::resample(f, OVERSAMPLE * f.len());
    Ok(match which {
        Inequality::Ibp => {
            let f_ss: Vec<f64> = spectral::derivative(f, 2).into_iter().map(|d| d / (w * w)).collect();
            n1 * n1 / (n0 * norm(&f_ss))
        }
        Inequality::GnInfinity => fine.iter().fold(0.0_f64, |m, v| m.max(v.abs())).powi(2) / (n0 * n1),
        Inequality::L4 => {
            spectral::integrate(&fine.iter().map(|v| v.powi(4)).collect::<Vec<_>>(), l) / (n0.powi(3) * n1)
        }
        Inequality::L3 => {
            spectral::integrate(&fine.iter().map(|v| v.abs().powi(3)).collect::<Vec<_>>(), l)
                / (n0.powf(2.5) * n1.sqrt())
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: Inequality,
    pub omega: i64,
    pub samples: usize,
    pub n: usize,
    pub worst_ratio: f64,
    pub worst_seed: u64,
    /// Worst ratio over the same family sampled on `2n` points.
    pub refined_worst_ratio: f64,
    pub refinement_change: f64,
    /// Closed-form constant the ratio must not exceed, if known.
    pub bound: Option<f64>,
    pub passed: bool,
}

/// Worst-case ratio of one inequality over the seeded family
/// `seeds.start..seeds.end`.
pub fn inequality_probe(
    which: Inequality,
    omega: i64,
    seeds: std::ops::Range<u64>,
    n: usize,
) -> Result<InequalityReport> {
    if omega < 1 {
        return Err(Error::InvalidArgument(format!("omega must be at least 1, got {omega}")));
    }
    let ids: Vec<u64> = seeds.collect();
    if ids.is_empty() {
        return Err(Error::InvalidArgument("empty seed range".into()));
    }
    let sweep = |grid: usize| -> Result<(f64, u64)> {
        let ratios = crate::batch::map(&ids, |&s| inequality_ratio(&random_mean_zero(s, grid), omega, which));
        let mut worst = (f64::NEG_INFINITY, ids[0]);
        for (r, &s) in ratios.into_iter().zip(&ids) {
            let r = r?;
            if r > worst.0 {
                worst = (r, s);
            }
        }
        Ok(worst)
    };
    let (worst_ratio, worst_seed) = sweep(n)?;
    let (refined, _) = sweep(2 * n)?;
    let change = (refined - worst_ratio).abs() / worst_ratio;
    let bound = which.sharp_constant();
    let passed = worst_ratio.is_finite()
        && match bound {
            Some(c) => worst_ratio <= c + 1e-10,
            None => change <= 0.05,
        };
    Ok(InequalityReport {
        inequality: which,
        omega,
        samples: ids.len(),
        n,
        worst_ratio,
        worst_seed,
        refined_worst_ratio: refined,
        refinement_change: change,
        bound,
        passed,
    })
}

/// Curve at `config.t_end`.
pub fn terminal_curve(curve: &ClosedCurve, config: &FlowConfig) -> Result<ClosedCurve> {
    let state = FlowState::new(curve.clone(), config.mode)?;
    Ok(flow::advance(state, config, config.t_end)?.curve)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub times: Vec<f64>,
    /// Sample-wise sup distance between the two schemes at each time.
    pub distances: Vec<f64>,
    pub max_distance: f64,
}

/// Run both schemes without reparametrisation and compare the curves
/// sample by sample at `checkpoints` equally spaced times.
pub fn scheme_cross_check(
    curve: &ClosedCurve,
    mode: FlowMode,
    t_end: f64,
    semi_dt: f64,
    checkpoints: usize,
) -> Result<CrossCheck> {
    let every = t_end / checkpoints as f64;
    let mut rk = FlowConfig::new(mode, Scheme::ExplicitRk4, t_end)
        .without_resampling()
        .with_output_every(every);
    rk.dt = Some(StepSize::Auto);
    let semi = FlowConfig::new(mode, Scheme::SemiImplicitSpectral, t_end)
        .without_resampling()
        .with_dt(semi_dt)
        .with_output_every(every);
    let configs = [rk, semi];
    let runs = crate::batch::map(&configs, |cfg| {
        let mut curves = Vec::new();
        let mut cfg = cfg.clone();
        cfg.gauge_diagnostics = false;
        flow::run_observed(curve, &cfg, |s| curves.push((s.t, s.curve.clone()))).map(|_| curves)
    });
    let mut runs = runs.into_iter();
    let a = runs.next().unwrap()?;
    let b = runs.next().unwrap()?;
    let times: Vec<f64> = a.iter().map(|x| x.0).collect();
    let distances: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.1.max_distance(&y.1)).collect();
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    Ok(CrossCheck { times, distances, max_distance })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log₂` of consecutive error ratios divided by `log₂` of the step ratio.
    pub orders: Vec<f64>,
    pub mean_order: f64,
}

/// Terminal error against `reference` for each fixed step in `dts`.
pub fn temporal_convergence(
    curve: &ClosedCurve,
    config: &FlowConfig,
    dts: &[f64],
    reference: &ClosedCurve,
) -> Result<OrderReport> {
    let errors = crate::batch::map(dts, |&dt| {
        let cfg = config.clone().with_dt(dt);
        terminal_curve(curve, &cfg).map(|c| c.max_distance(reference))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let orders: Vec<f64> = (1..dts.len())
        .map(|i| (errors[i - 1] / errors[i]).ln() / (dts[i - 1] / dts[i]).ln())
        .collect();
    let mean_order = orders.iter().sum::<f64>() / orders.len().max(1) as f64;
    Ok(OrderReport {
        dts: dts.to_vec(),
        errors,
        orders,
        mean_order,
    })
}
