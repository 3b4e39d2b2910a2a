//! Time stepping of the free elastic flow `∂_t γ = −(2k_ss + k³) ν` and of its
//! length-preserving rescaling `∂_t γ = −(2k_ss + k³ − λ γ·ν) ν`.
//!
//! Two schemes are available. `explicit_rk4` is classical fourth-order
//! Runge–Kutta with a step bounded by the `(Δs)⁴` stability ceiling.
//! `semi_implicit_spectral` treats the stiff part `−2∂_s⁴` implicitly in the
//! Fourier basis with the metric frozen per step:
//!
//! `γⁿ⁺¹ = γⁿ + Δt (I + 2Δt D⁴)⁻¹ [V ν]ⁿ`,  `D⁴ ↦ (j / g_min)⁴`,
//!
//! where `g_min = min |γ_u|`. Taking the smallest metric makes the implicit
//! symbol dominate the true one at every sample, so high modes are damped
//! unconditionally. The scheme is first order in time.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::geometry::{compute_geometry, GeometricData};
use crate::spectral::{self, TrigInterpolant};
use crate::support::decompose;

/// Default step of the semi-implicit scheme.
pub const SEMI_IMPLICIT_DT: f64 = 1e-4;
/// Auto steps below this abort the run.
pub const MIN_AUTO_DT: f64 = 1e-13;
/// Stability abscissa of classical RK4 on the negative real axis, rounded down.
const RK4_STABILITY: f64 = 2.8;
/// Safety factor on the RK4 stability bound.
const RK4_SAFETY: f64 = 0.5;
/// Curvature scale `max |k| L` treated as blow-up.
const CURVATURE_OVERFLOW: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    Free,
    Rescaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExplicitRk4,
    SemiImplicitSpectral,
}

/// Step-size policy: a fixed step, or `"auto"`. Auto means the stability
/// step for `explicit_rk4`, recomputed every step, and the default
/// accuracy step for `semi_implicit_spectral`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

impl Serialize for StepSize {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StepSize::Auto => s.serialize_str("auto"),
            StepSize::Fixed(dt) => s.serialize_f64(*dt),
        }
    }
}

impl<'de> Deserialize<'de> for StepSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(dt) => Ok(StepSize::Fixed(dt)),
            Raw::Word(w) if w == "auto" => Ok(StepSize::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "dt must be a number or \"auto\", got \"{w}\""
            ))),
        }
    }
}

fn default_scheme() -> Scheme {
    Scheme::SemiImplicitSpectral
}

fn default_resample_threshold() -> f64 {
    1.2
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub mode: FlowMode,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Absent: 1e-4 for the semi-implicit scheme, auto for RK4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<StepSize>,
    pub t_end: f64,
    /// Rescaled mode only. Absent: `2πω` of the initial curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_length: Option<f64>,
    #[serde(default = "default_resample_threshold")]
    pub resample_ratio_threshold: f64,
    /// Absent: true in rescaled mode, false in free mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize_length: Option<bool>,
    /// Diagnostics cadence. Absent: `t_end / 100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<f64>,
    /// Regrid the initial curve to this many samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    /// Compute the normal-angle diagnostics `a₁, a₂, ‖w‖, dist` when the
    /// curve is convex.
    #[serde(default = "default_true")]
    pub gauge_diagnostics: bool,
}

impl FlowConfig {
    pub fn new(mode: FlowMode, scheme: Scheme, t_end: f64) -> Self {
        Self {
            mode,
            scheme,
            dt: None,
            t_end,
            target_length: None,
            resample_ratio_threshold: default_resample_threshold(),
            renormalize_length: None,
            output_every: None,
            n_samples: None,
            gauge_diagnostics: true,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(StepSize::Fixed(dt));
        self
    }

    pub fn with_output_every(mut self, every: f64) -> Self {
        self.output_every = Some(every);
        self
    }

    /// Turn off reparametrisation (useful when comparing grids sample by sample).
    pub fn without_resampling(mut self) -> Self {
        self.resample_ratio_threshold = f64::INFINITY;
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if let Some(StepSize::Fixed(dt)) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.resample_ratio_threshold > 1.0) {
            return bad(format!(
                "resample_ratio_threshold must exceed 1, got {}",
                self.resample_ratio_threshold
            ));
        }
        if let Some(l) = self.target_length {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("target_length must be positive, got {l}"));
            }
        }
        if let Some(o) = self.output_every {
            if !(o > 0.0 && o.is_finite()) {
                return bad(format!("output_every must be positive, got {o}"));
            }
        }
        if let Some(n) = self.n_samples {
            if n < 16 || n % 2 != 0 {
                return Err(Error::InvalidSampleCount(n));
            }
        }
        Ok(())
    }

    pub fn renormalizes(&self) -> bool {
        self.renormalize_length.unwrap_or(self.mode == FlowMode::Rescaled)
    }

    pub fn output_interval(&self) -> f64 {
        self.output_every.unwrap_or(self.t_end / 100.0)
    }

    fn step_policy(&self) -> StepSize {
        match (self.scheme, self.dt) {
            (_, Some(StepSize::Fixed(dt))) => StepSize::Fixed(dt),
            (Scheme::SemiImplicitSpectral, _) => StepSize::Fixed(SEMI_IMPLICIT_DT),
            (Scheme::ExplicitRk4, _) => StepSize::Auto,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub curve: ClosedCurve,
    pub geometry: GeometricData,
    /// Rescaling multiplier, rescaled mode only.
    pub lambda: Option<f64>,
    pub step_count: u64,
}

impl FlowState {
    pub fn new(curve: ClosedCurve, mode: FlowMode) -> Result<Self> {
        let geometry = compute_geometry(&curve)?;
        let lambda = (mode == FlowMode::Rescaled).then(|| lambda_coefficient(&geometry));
        Ok(Self {
            t: 0.0,
            curve,
            geometry,
            lambda,
            step_count: 0,
        })
    }
}

/// `λ = (2∫k_s² ds − ∫k⁴ ds) / L`
pub fn lambda_coefficient(geom: &GeometricData) -> f64 {
    (2.0 * geom.ks_norm_sq() - geom.k4_integral()) / geom.length
}

/// `V = −(2k_ss + k³)` in free mode, `V = −(2k_ss + k³ − λ γ·ν)` in rescaled
/// mode. `k³` is formed on the padded grid.
pub fn normal_speed(geom: &GeometricData, mode: FlowMode, lambda: f64) -> Vec<f64> {
    let k3 = spectral::dealiased_product(&[&geom.k, &geom.k, &geom.k]);
    let lam = if mode == FlowMode::Rescaled { lambda } else { 0.0 };
    (0..geom.n_samples())
        .map(|j| -(2.0 * geom.k_ss[j] + k3[j] - lam * geom.gamma_dot_nu[j]))
        .collect()
}

fn velocity(geom: &GeometricData, mode: FlowMode) -> Vec<Complex64> {
    let lambda = if mode == FlowMode::Rescaled { lambda_coefficient(geom) } else { 0.0 };
    normal_speed(geom, mode, lambda)
        .into_iter()
        .zip(&geom.normal)
        .map(|(v, nu)| Complex64::new(v * nu[0], v * nu[1]))
        .collect()
}

fn min_metric(geom: &GeometricData) -> f64 {
    geom.metric.iter().copied().fold(f64::INFINITY, f64::min)
}

/// RK4 stability step `0.5 · 2.8 / (2 ξ⁴)` with `ξ = (N/2) / min |γ_u|`.
pub fn explicit_stable_dt(geom: &GeometricData) -> f64 {
    let xi = 0.5 * geom.n_samples() as f64 / min_metric(geom);
    RK4_SAFETY * RK4_STABILITY / (2.0 * xi.powi(4))
}

fn stage_geometry(z: &[Complex64], t: f64) -> Result<GeometricData> {
    let curve = ClosedCurve::from_complex(z).map_err(|e| Error::StepRejected {
        t,
        reason: e.to_string(),
    })?;
    compute_geometry(&curve).map_err(|e| Error::StepRejected {
        t,
        reason: e.to_string(),
    })
}

fn rk4_increment(state: &FlowState, mode: FlowMode, dt: f64) -> Result<Vec<Complex64>> {
    let z0 = state.curve.to_complex();
    let axpy = |a: f64, x: &[Complex64]| -> Vec<Complex64> {
        z0.iter().zip(x).map(|(z, v)| z + v * a).collect()
    };
    let k1 = velocity(&state.geometry, mode);
    let k2 = velocity(&stage_geometry(&axpy(0.5 * dt, &k1), state.t)?, mode);
    let k3 = velocity(&stage_geometry(&axpy(0.5 * dt, &k2), state.t)?, mode);
    let k4 = velocity(&stage_geometry(&axpy(dt, &k3), state.t)?, mode);
    Ok((0..z0.len())
        .map(|j| (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0))
        .collect())
}

fn semi_implicit_increment(state: &FlowState, mode: FlowMode, dt: f64) -> Vec<Complex64> {
    let mut v = velocity(&state.geometry, mode);
    let n = v.len();
    let g = min_metric(&state.geometry);
    spectral::forward(&mut v);
    for (j, c) in v.iter_mut().enumerate() {
        let xi = spectral::wavenumber(j, n) / g;
        *c *= dt / (1.0 + 2.0 * dt * xi.powi(4));
    }
    spectral::inverse(&mut v);
    v
}

/// One step of size `dt`, followed by length renormalisation and
/// reparametrisation as configured.
pub fn step_with_dt(state: &FlowState, config: &FlowConfig, dt: f64) -> Result<FlowState> {
    let increment = match config.scheme {
        Scheme::ExplicitRk4 => rk4_increment(state, config.mode, dt)?,
        Scheme::SemiImplicitSpectral => semi_implicit_increment(state, config.mode, dt),
    };
    let t = state.t + dt;
    let z: Vec<Complex64> = state
        .curve
        .to_complex()
        .iter()
        .zip(&increment)
        .map(|(a, b)| a + b)
        .collect();
    let rejected = |reason: String| Error::StepRejected { t, reason };
    let mut curve = ClosedCurve::from_complex(&z).map_err(|e| rejected(e.to_string()))?;
    if config.renormalizes() {
        let target = target_length(config, &state.geometry);
        curve = curve.scaled(target / curve.length());
    }
    let mut geometry = compute_geometry(&curve).map_err(|e| rejected(e.to_string()))?;
    let k_max = geometry.k.iter().fold(0.0_f64, |m, k| m.max(k.abs()));
    if !(k_max * geometry.length < CURVATURE_OVERFLOW) {
        return Err(rejected(format!("curvature overflow, max |k| = {k_max:e}")));
    }
    if metric_ratio(&geometry) > config.resample_ratio_threshold {
        curve = resample_uniform_arclength(&curve).map_err(|e| rejected(e.to_string()))?;
        geometry = compute_geometry(&curve).map_err(|e| rejected(e.to_string()))?;
    }
    let lambda = (config.mode == FlowMode::Rescaled).then(|| lambda_coefficient(&geometry));
    Ok(FlowState {
        t,
        curve,
        geometry,
        lambda,
        step_count: state.step_count + 1,
    })
}

/// One step with the configured step-size policy.
pub fn step(state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let dt = match config.step_policy() {
        StepSize::Fixed(dt) => dt,
        StepSize::Auto => auto_dt(state)?,
    };
    step_with_dt(state, config, dt)
}

fn auto_dt(state: &FlowState) -> Result<f64> {
    let dt = explicit_stable_dt(&state.geometry);
    if !(dt >= MIN_AUTO_DT) {
        return Err(Error::DtUnderflow {
            dt,
            snapshot: Box::new(state.clone()),
        });
    }
    Ok(dt)
}

fn target_length(config: &FlowConfig, geom: &GeometricData) -> f64 {
    config
        .target_length
        .unwrap_or(2.0 * PI * geom.turning_number as f64)
}

/// `max |γ_u| / min |γ_u|`
pub fn metric_ratio(geom: &GeometricData) -> f64 {
    let max = geom.metric.iter().copied().fold(0.0, f64::max);
    max / min_metric(geom)
}

/// Advance to `t_target`. Fixed steps are shortened uniformly so the target
/// is hit exactly; auto steps are clipped at the target.
pub fn advance(state: FlowState, config: &FlowConfig, t_target: f64) -> Result<FlowState> {
    let mut state = state;
    let remaining = t_target - state.t;
    if remaining <= 0.0 {
        return Ok(state);
    }
    match config.step_policy() {
        StepSize::Fixed(dt) => {
            let steps = ((remaining / dt) - 1e-9).ceil().max(1.0) as u64;
            let h = remaining / steps as f64;
            for _ in 0..steps {
                state = step_with_dt(&state, config, h)?;
            }
        }
        StepSize::Auto => {
            while t_target - state.t > 1e-14 * t_target.abs().max(1.0) {
                let h = auto_dt(&state)?.min(t_target - state.t);
                state = step_with_dt(&state, config, h)?;
            }
        }
    }
    state.t = t_target;
    Ok(state)
}

/// Redistribute the samples uniformly in arclength along the trigonometric
/// interpolant of the curve. The first sample is kept.
pub fn resample_uniform_arclength(curve: &ClosedCurve) -> Result<ClosedCurve> {
    let z = curve.to_complex();
    let n = z.len();
    let metric: Vec<f64> = spectral::derivative_complex(&z, 1).iter().map(|c| c.norm()).collect();
    let g_mean = spectral::mean(&metric);
    // s(u) = ḡ u + P(u) with P periodic
    let fluct: Vec<f64> = metric.iter().map(|g| g - g_mean).collect();
    let p = TrigInterpolant::from_real(&spectral::antiderivative(&fluct));
    let position = TrigInterpolant::from_complex(&z);
    let s = |u: f64| {
        let (v, d) = p.eval_with_derivative(u);
        (g_mean * u + v.re, g_mean + d.re)
    };
    let s0 = s(0.0).0;
    let total = 2.0 * PI * g_mean;
    let mut out = Vec::with_capacity(n);
    out.push(z[0]);
    let mut lo_prev = 0.0;
    for j in 1..n {
        let target = s0 + total * j as f64 / n as f64;
        let (mut lo, mut hi) = (lo_prev, 2.0 * PI);
        let mut x = lo_prev + (target - s(lo_prev).0) / g_mean;
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let (val, slope) = s(x);
            let f = val - target;
            if f.abs() <= 1e-14 * total {
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
        lo_prev = x;
        out.push(position.eval(x));
    }
    ClosedCurve::from_complex(&out)
}

/// Diagnostics row. Normal-angle fields are `None` unless the curve is
/// strictly convex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub length: f64,
    pub energy: f64,
    pub k_osc: f64,
    pub e: f64,
    pub ks2: f64,
    pub lambda: f64,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub wnorm: Option<f64>,
    pub dist: Option<f64>,
}

pub const CSV_HEADER: &str = "t,L,E,Kosc,e,ks2,lambda,a1,a2,wnorm,dist";

impl TimeSeriesRecord {
    pub fn from_state(state: &FlowState, gauge: bool) -> Self {
        let g = &state.geometry;
        let dec = if gauge { decompose(&state.curve, g).ok() } else { None };
        Self {
            t: state.t,
            length: g.length,
            energy: g.energy,
            k_osc: g.oscillation,
            e: g.deviation,
            ks2: g.ks_norm_sq(),
            lambda: state.lambda.unwrap_or_else(|| lambda_coefficient(g)),
            a1: dec.as_ref().map(|d| d.a1),
            a2: dec.as_ref().map(|d| d.a2),
            wnorm: dec.as_ref().map(|d| d.w_norm()),
            dist: dec.as_ref().map(|d| d.support_proxy()),
        }
    }

    /// Value of a CSV column by header name; `|a|` is available as `a`.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "t" => Some(self.t),
            "L" => Some(self.length),
            "E" => Some(self.energy),
            "Kosc" => Some(self.k_osc),
            "e" => Some(self.e),
            "ks2" => Some(self.ks2),
            "lambda" => Some(self.lambda),
            "a1" => self.a1,
            "a2" => self.a2,
            "a" => Some(self.a1?.hypot(self.a2?)),
            "wnorm" => self.wnorm,
            "dist" => self.dist,
            _ => None,
        }
    }

    fn write_csv(&self, out: &mut String) {
        let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_number(self.t),
            format_number(self.length),
            format_number(self.energy),
            format_number(self.k_osc),
            format_number(self.e),
            format_number(self.ks2),
            format_number(self.lambda),
            opt(self.a1),
            opt(self.a2),
            opt(self.wnorm),
            opt(self.dist)
        );
    }
}

/// Shortest decimal that parses back to the same `f64`, in exponent form
/// for very small or large magnitudes.
pub fn format_number(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub records: Vec<TimeSeriesRecord>,
    pub final_state: FlowState,
}

impl TimeSeries {
    pub fn to_csv(&self) -> String {
        series_csv(&self.records)
    }

    /// `(t, value)` pairs of a column, skipping rows where it is absent.
    pub fn column(&self, name: &str) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.column(name).map(|v| (r.t, v)))
            .collect()
    }
}

pub fn series_csv(records: &[TimeSeriesRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        r.write_csv(&mut out);
    }
    out
}

/// Parse a series written by [`series_csv`].
pub fn parse_series_csv(text: &str) -> Result<Vec<TimeSeriesRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "expected CSV header `{CSV_HEADER}`, got `{}`",
                other.unwrap_or("")
            )))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            return Err(Error::InvalidArgument(format!(
                "CSV row {} has {} cells, expected 11",
                i + 2,
                cells.len()
            )));
        }
        let num = |c: &str| -> Result<f64> {
            c.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("CSV row {}: bad number `{c}`", i + 2))
            })
        };
        let opt = |c: &str| -> Result<Option<f64>> {
            if c.trim().is_empty() {
                Ok(None)
            } else {
                num(c).map(Some)
            }
        };
        out.push(TimeSeriesRecord {
            t: num(cells[0])?,
            length: num(cells[1])?,
            energy: num(cells[2])?,
            k_osc: num(cells[3])?,
            e: num(cells[4])?,
            ks2: num(cells[5])?,
            lambda: num(cells[6])?,
            a1: opt(cells[7])?,
            a2: opt(cells[8])?,
            wnorm: opt(cells[9])?,
            dist: opt(cells[10])?,
        });
    }
    Ok(out)
}

/// Run the flow from `curve` to `config.t_end`, recording diagnostics at
/// every multiple of the output interval.
pub fn run(curve: &ClosedCurve, config: &FlowConfig) -> Result<TimeSeries> {
    run_observed(curve, config, |_| {})
}

/// As [`run`], calling `observe` on the state at every output time.
pub fn run_observed(
    curve: &ClosedCurve,
    config: &FlowConfig,
    mut observe: impl FnMut(&FlowState),
) -> Result<TimeSeries> {
    config.validate()?;
    let mut curve = match config.n_samples {
        Some(n) if n != curve.n_samples() => curve.regridded(n)?,
        _ => curve.clone(),
    };
    let geom = compute_geometry(&curve)?;
    if metric_ratio(&geom) > config.resample_ratio_threshold {
        curve = resample_uniform_arclength(&curve)?;
    }
    if config.renormalizes() {
        let target = target_length(config, &geom);
        curve = curve.scaled(target / curve.length());
    }
    let mut state = FlowState::new(curve, config.mode)?;
    let every = config.output_interval();
    let outputs = ((config.t_end / every) - 1e-9).ceil().max(1.0) as u64;
    let mut records = Vec::with_capacity(outputs as usize + 1);
    records.push(TimeSeriesRecord::from_state(&state, config.gauge_diagnostics));
    observe(&state);
    for i in 1..=outputs {
        let target = (i as f64 * every).min(config.t_end);
        state = advance(state, config, target)?;
        records.push(TimeSeriesRecord::from_state(&state, config.gauge_diagnostics));
        observe(&state);
    }
    Ok(TimeSeries {
        records,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{perturbed_omega_circle, Scenario};

    fn build(spec: &str, n: usize) -> ClosedCurve {
        spec.parse::<Scenario>().unwrap().build(n).unwrap()
    }

    #[test]
    fn omega_circle_is_rescaled_fixed_point() {
        for omega in 1..=3 {
            let g = compute_geometry(&build(&format!("omega_circle:{omega}"), 64)).unwrap();
            assert!((lambda_coefficient(&g) + 1.0).abs() < 1e-12);
            let v = normal_speed(&g, FlowMode::Rescaled, lambda_coefficient(&g));
            let worst = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            assert!(worst < 1e-12, "omega {omega}: {worst:e}");
        }
    }

    #[test]
    fn free_circle_moves_outward() {
        let g = compute_geometry(&build("omega_circle:1,2", 32)).unwrap();
        let v = normal_speed(&g, FlowMode::Free, 0.0);
        // ν points inward, so outward motion is V < 0
        assert!(v.iter().all(|x| (x + 0.125).abs() < 1e-12));
    }

    #[test]
    fn translated_circle_speed_is_first_harmonic() {
        let c = 1e-3;
        let g = compute_geometry(&build(&format!("translated_circle:{c},0"), 64)).unwrap();
        let v = normal_speed(&g, FlowMode::Rescaled, lambda_coefficient(&g));
        for (j, x) in v.iter().enumerate() {
            let expected = -c * g.normal[j][0];
            assert!((x - expected).abs() < 1e-9, "{x} vs {expected}");
        }
    }

    #[test]
    fn lambda_deviation_is_quadratic() {
        let dev = |eps: f64| {
            let g = compute_geometry(&perturbed_omega_circle(1, 2, eps, 0.0, 128).unwrap()).unwrap();
            let l = 2.0 * PI / g.length;
            // normalise length first: λ scales like L⁻⁴
            lambda_coefficient(&g) / l.powi(4) + 1.0
        };
        let ratio = dev(2e-3) / dev(1e-3);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn stationary_step_leaves_circle_unchanged() {
        for scheme in [Scheme::SemiImplicitSpectral, Scheme::ExplicitRk4] {
            let c = build("omega_circle:2", 32);
            let cfg = FlowConfig::new(FlowMode::Rescaled, scheme, 1.0).with_dt(1e-6);
            let s0 = FlowState::new(c.clone(), FlowMode::Rescaled).unwrap();
            let s1 = step(&s0, &cfg).unwrap();
            assert!(s1.curve.max_distance(&c) < 1e-10);
        }
    }

    #[test]
    fn resampling_uniform_circle_is_identity() {
        let c = build("circle", 64);
        let r = resample_uniform_arclength(&c).unwrap();
        assert!(r.max_distance(&c) < 1e-12);
    }

    #[test]
    fn resampling_ellipse_equidistributes() {
        let c = build("ellipse:2,1", 256);
        let g0 = compute_geometry(&c).unwrap();
        let r = resample_uniform_arclength(&c).unwrap();
        let g1 = compute_geometry(&r).unwrap();
        assert!((g1.length - g0.length).abs() < 1e-9);
        assert!((metric_ratio(&g1) - 1.0).abs() < 1e-6, "ratio {}", metric_ratio(&g1));
        assert!((g1.energy - g0.energy).abs() < 1e-8);
    }

    #[test]
    fn resampling_preserves_oscillation() {
        let c = build("sheared_circle:0.3", 128);
        let before = compute_geometry(&c).unwrap().oscillation;
        let after = compute_geometry(&resample_uniform_arclength(&c).unwrap()).unwrap().oscillation;
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn config_json_defaults_and_errors() {
        let c = FlowConfig::from_json(r#"{"mode":"rescaled","t_end":1.0}"#).unwrap();
        assert_eq!(c.scheme, Scheme::SemiImplicitSpectral);
        assert_eq!(c.resample_ratio_threshold, 1.2);
        assert!(c.renormalizes());
        let c = FlowConfig::from_json(r#"{"mode":"free","scheme":"explicit_rk4","dt":"auto","t_end":1}"#)
            .unwrap();
        assert_eq!(c.dt, Some(StepSize::Auto));
        assert!(!c.renormalizes());
        assert!(FlowConfig::from_json(r#"{"mode":"free","t_end":-1}"#).is_err());
        assert!(FlowConfig::from_json(r#"{"mode":"free","t_end":1,"dt":"fast"}"#).is_err());
        assert!(FlowConfig::from_json(r#"{"mode":"free","t_end":1,"typo":1}"#).is_err());
        let back = FlowConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn free_ellipse_energy_decreases() {
        let cfg = FlowConfig::new(FlowMode::Free, Scheme::SemiImplicitSpectral, 0.2)
            .with_dt(1e-4)
            .with_output_every(0.01);
        let series = run(&build("ellipse:2,1", 64), &cfg).unwrap();
        let e: Vec<f64> = series.records.iter().map(|r| r.energy).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rescaled_run_preserves_length() {
        let cfg = FlowConfig::new(FlowMode::Rescaled, Scheme::SemiImplicitSpectral, 0.05)
            .with_dt(1e-4)
            .with_output_every(0.01);
        let c = perturbed_omega_circle(2, 3, 1e-2, 0.0, 64).unwrap();
        let series = run(&c, &cfg).unwrap();
        for r in &series.records {
            assert!((r.length - 4.0 * PI).abs() / (4.0 * PI) < 1e-6);
        }
        assert!(series.records.last().unwrap().e < series.records[0].e);
    }

    #[test]
    fn csv_round_trip() {
        let cfg = FlowConfig::new(FlowMode::Rescaled, Scheme::SemiImplicitSpectral, 0.01)
            .with_dt(1e-3)
            .with_output_every(0.005);
        let series = run(&build("translated_circle:0.05,0", 32), &cfg).unwrap();
        let csv = series.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(parse_series_csv(&csv).unwrap(), series.records);
        // figure-eight rows have empty gauge cells
        let fig = FlowState::new(build("figure_eight", 64), FlowMode::Free).unwrap();
        let row = series_csv(&[TimeSeriesRecord::from_state(&fig, true)]);
        assert!(row.trim_end().ends_with(",,,,"));
    }

    #[test]
    fn auto_dt_underflow_aborts_with_snapshot() {
        // nearly singular parametrisation forces a vanishing stability step
        let c = ClosedCurve::from_fn(64, |u| {
            let v = u - 0.999999 * u.sin();
            [v.cos(), v.sin()]
        })
        .unwrap();
        let mut cfg = FlowConfig::new(FlowMode::Free, Scheme::ExplicitRk4, 1.0).without_resampling();
        cfg.dt = Some(StepSize::Auto);
        let s = FlowState::new(c, FlowMode::Free).unwrap();
        match step(&s, &cfg) {
            Err(Error::DtUnderflow { snapshot, .. }) => assert_eq!(snapshot.step_count, 0),
            other => panic!("expected underflow, got {:?}", other.map(|s| s.t)),
        }
    }
}
