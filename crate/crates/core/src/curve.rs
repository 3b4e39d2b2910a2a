//! Closed plane curves sampled on a uniform periodic parameter grid, and the
//! scenario constructors used throughout the crate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Position samples `γ(u_j)`, `u_j = 2πj/n`, of a closed immersed curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile", into = "CurveFile")]
pub struct ClosedCurve {
    points: Vec<[f64; 2]>,
}

/// On-disk layout: `{"n": N, "points": [[x, y], ...]}`.
#[derive(Serialize, Deserialize)]
struct CurveFile {
    n: usize,
    points: Vec<[f64; 2]>,
}

impl TryFrom<CurveFile> for ClosedCurve {
    type Error = Error;

    fn try_from(file: CurveFile) -> Result<Self> {
        if file.n != file.points.len() {
            return Err(Error::InvalidArgument(format!(
                "declared n = {} but {} points given",
                file.n,
                file.points.len()
            )));
        }
        ClosedCurve::new(file.points)
    }
}

impl From<ClosedCurve> for CurveFile {
    fn from(c: ClosedCurve) -> Self {
        CurveFile {
            n: c.points.len(),
            points: c.points,
        }
    }
}

impl ClosedCurve {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        let n = points.len();
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::InvalidSampleCount(n));
        }
        if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self { points })
    }

    pub fn from_complex(z: &[Complex64]) -> Result<Self> {
        Self::new(z.iter().map(|c| [c.re, c.im]).collect())
    }

    /// Samples `f(u_j)` on the uniform grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> [f64; 2]) -> Result<Self> {
        Self::new(spectral::grid(n).into_iter().map(f).collect())
    }

    pub fn n_samples(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| [p[0] * factor, p[1] * factor]).collect(),
        }
    }

    pub fn translated(&self, offset: [f64; 2]) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| [p[0] + offset[0], p[1] + offset[1]])
                .collect(),
        }
    }

    /// Same trace traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let n = self.points.len();
        Self {
            points: (0..n).map(|j| self.points[(n - j) % n]).collect(),
        }
    }

    /// Band-limited re-sampling onto `n` points of the same parameter circle.
    pub fn regridded(&self, n: usize) -> Result<Self> {
        Self::from_complex(&spectral::resample_complex(&self.to_complex(), n))
    }

    /// Length by the trapezoidal rule on `|γ_u|`.
    pub fn length(&self) -> f64 {
        let du = spectral::derivative_complex(&self.to_complex(), 1);
        spectral::integrate(&du.iter().map(|c| c.norm()).collect::<Vec<_>>(), 2.0 * PI)
    }

    /// Sup-norm distance between corresponding samples.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("curve serialisation cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// One cosine term `amplitude · cos(m ϑ / ω + phase)` of a support function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportHarmonic {
    pub m: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Curve with support function `h(ϑ) = 1 + Σ ε cos(mϑ/ω + φ)` on the
/// normal-angle circle `[0, 2πω)`, shifted by `center`, reconstructed through
/// `γ = h ν(ϑ) + h_ϑ t(ϑ)` with `ν(ϑ) = (cos ϑ, sin ϑ)`, `t(ϑ) = (−sin ϑ, cos ϑ)`.
/// Sampled at `ϑ_j = ω u_j`, so the parameter is the normal angle.
pub fn support_curve(
    omega: u32,
    harmonics: &[SupportHarmonic],
    center: [f64; 2],
    n: usize,
) -> Result<ClosedCurve> {
    if omega == 0 {
        return Err(Error::InvalidArgument("turning number must be at least 1".into()));
    }
    if harmonics.iter().any(|h| h.m == 0 && h.amplitude != 0.0) {
        return Err(Error::LengthChangingMode);
    }
    let w = omega as f64;
    let radius = |theta: f64| {
        1.0 + harmonics
            .iter()
            .map(|h| {
                let q = h.m as f64 / w;
                h.amplitude * (1.0 - q * q) * (q * theta + h.phase).cos()
            })
            .sum::<f64>()
    };
    let top_mode = harmonics.iter().map(|h| h.m).max().unwrap_or(1).max(1) as usize;
    let dense = (64 * top_mode).max(4096);
    let min_radius = (0..dense)
        .map(|j| radius(2.0 * PI * w * j as f64 / dense as f64))
        .fold(f64::INFINITY, f64::min);
    if min_radius <= 0.0 {
        return Err(Error::NonConvexRequest { min_radius });
    }
    ClosedCurve::from_fn(n, |u| {
        let theta = w * u;
        let (mut h, mut h_theta) = (1.0, 0.0);
        for hm in harmonics {
            let q = hm.m as f64 / w;
            let arg = q * theta + hm.phase;
            h += hm.amplitude * arg.cos();
            h_theta -= hm.amplitude * q * arg.sin();
        }
        let (s, c) = theta.sin_cos();
        [
            center[0] + h * c - h_theta * s,
            center[1] + h * s + h_theta * c,
        ]
    })
}

/// Single-mode perturbation of the unit ω-circle through its support function.
pub fn perturbed_omega_circle(
    omega: u32,
    m: u32,
    amplitude: f64,
    phase: f64,
    n: usize,
) -> Result<ClosedCurve> {
    if m == 0 {
        return Err(Error::LengthChangingMode);
    }
    support_curve(omega, &[SupportHarmonic { m, amplitude, phase }], [0.0, 0.0], n)
}

/// Random band-limited convex curve: eight support modes with amplitudes
/// decaying like `m⁻⁴`, capped so that `|ρ − 1| ≤ 1/2`, plus a small offset.
pub fn random_support_curve(seed: u64, omega: u32, n: usize) -> Result<ClosedCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = omega as f64;
    let mut harmonics: Vec<SupportHarmonic> = (1..)
        .filter(|&m| m != omega)
        .take(8)
        .map(|m| SupportHarmonic {
            m,
            amplitude: rng.random_range(-1.0..1.0) * (m as f64).powi(-4),
            phase: rng.random_range(0.0..2.0 * PI),
        })
        .collect();
    let bound: f64 = harmonics
        .iter()
        .map(|h| h.amplitude.abs() * (1.0 - (h.m as f64 / w).powi(2)).abs())
        .sum();
    let cap = 0.5 * rng.random_range(0.2..1.0);
    if bound > cap {
        for h in &mut harmonics {
            h.amplitude *= cap / bound;
        }
    }
    let center = [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
    support_curve(omega, &harmonics, center, n)
}

/// Named curve families addressable by a short string, e.g.
/// `omega_circle:3`, `perturbed:omega=1,m=2,eps=1e-3`, `ellipse:2,1`,
/// `translated_circle:0.1,0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// `omega_circle:W[,R]`
    OmegaCircle { omega: u32, radius: f64 },
    /// `perturbed:omega=W,m=M,eps=E[,phase=P]`
    Perturbed { omega: u32, m: u32, eps: f64, phase: f64 },
    /// `support:omega=W,m2=E2,m4=E4[,cx=X,cy=Y]`
    Support { omega: u32, harmonics: Vec<SupportHarmonic>, center: [f64; 2] },
    /// `ellipse:A,B`
    Ellipse { a: f64, b: f64 },
    /// `translated_circle:CX,CY[,W]`
    TranslatedCircle { offset: [f64; 2], omega: u32 },
    /// `sheared_circle:S`: unit circle sampled at `u + S sin u`
    ShearedCircle { shear: f64 },
    /// `figure_eight`
    FigureEight,
    /// `random:seed=S[,omega=W]`
    Random { seed: u64, omega: u32 },
}

impl Scenario {
    pub fn build(&self, n: usize) -> Result<ClosedCurve> {
        match *self {
            Scenario::OmegaCircle { omega, radius } => {
                let w = omega as f64;
                ClosedCurve::from_fn(n, |u| [radius * (w * u).cos(), radius * (w * u).sin()])
            }
            Scenario::Perturbed { omega, m, eps, phase } => {
                perturbed_omega_circle(omega, m, eps, phase, n)
            }
            Scenario::Support { omega, ref harmonics, center } => {
                support_curve(omega, harmonics, center, n)
            }
            Scenario::Ellipse { a, b } => ClosedCurve::from_fn(n, |u| [a * u.cos(), b * u.sin()]),
            Scenario::TranslatedCircle { offset, omega } => {
                let w = omega as f64;
                ClosedCurve::from_fn(n, |u| [offset[0] + (w * u).cos(), offset[1] + (w * u).sin()])
            }
            Scenario::ShearedCircle { shear } => {
                ClosedCurve::from_fn(n, |u| {
                    let v = u + shear * u.sin();
                    [v.cos(), v.sin()]
                })
            }
            Scenario::FigureEight => ClosedCurve::from_fn(n, |u| [u.sin(), u.sin() * u.cos()]),
            Scenario::Random { seed, omega } => random_support_curve(seed, omega, n),
        }
    }

    /// Turning number the scenario is built with.
    pub fn omega(&self) -> u32 {
        match *self {
            Scenario::OmegaCircle { omega, .. }
            | Scenario::Perturbed { omega, .. }
            | Scenario::Support { omega, .. }
            | Scenario::TranslatedCircle { omega, .. }
            | Scenario::Random { omega, .. } => omega,
            Scenario::Ellipse { .. } | Scenario::ShearedCircle { .. } => 1,
            Scenario::FigureEight => 0,
        }
    }
}

fn spec_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::CurveSpec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(spec: &str, field: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| spec_err(spec, format!("bad value `{value}` for {field}")))
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, args) = match spec.split_once(':') {
            Some((k, a)) => (k.trim(), a.trim()),
            None => (spec.trim(), ""),
        };
        let list: Vec<&str> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(str::trim).collect()
        };
        let keyed = || -> Result<Vec<(&str, &str)>> {
            list.iter()
                .map(|item| {
                    item.split_once('=')
                        .map(|(k, v)| (k.trim(), v.trim()))
                        .ok_or_else(|| spec_err(spec, format!("expected key=value, got `{item}`")))
                })
                .collect()
        };
        match kind {
            "circle" => Ok(Scenario::OmegaCircle { omega: 1, radius: 1.0 }),
            "omega_circle" => {
                let omega = match list.first() {
                    Some(v) => parse_num(spec, "omega", v)?,
                    None => 1,
                };
                let radius = match list.get(1) {
                    Some(v) => parse_num(spec, "radius", v)?,
                    None => 1.0,
                };
                if omega == 0 || radius <= 0.0 || list.len() > 2 {
                    return Err(spec_err(spec, "expected omega_circle:W[,R] with W ≥ 1, R > 0"));
                }
                Ok(Scenario::OmegaCircle { omega, radius })
            }
            "perturbed" => {
                let (mut omega, mut m, mut eps, mut phase) = (1, None, None, 0.0);
                for (k, v) in keyed()? {
                    match k {
                        "omega" => omega = parse_num(spec, k, v)?,
                        "m" => m = Some(parse_num(spec, k, v)?),
                        "eps" => eps = Some(parse_num(spec, k, v)?),
                        "phase" => phase = parse_num(spec, k, v)?,
                        _ => return Err(spec_err(spec, format!("unknown key `{k}`"))),
                    }
                }
                Ok(Scenario::Perturbed {
                    omega,
                    m: m.ok_or_else(|| spec_err(spec, "missing m"))?,
                    eps: eps.ok_or_else(|| spec_err(spec, "missing eps"))?,
                    phase,
                })
            }
            "support" => {
                let (mut omega, mut harmonics, mut center) = (1, Vec::new(), [0.0, 0.0]);
                for (k, v) in keyed()? {
                    match k {
                        "omega" => omega = parse_num(spec, k, v)?,
                        "cx" => center[0] = parse_num(spec, k, v)?,
                        "cy" => center[1] = parse_num(spec, k, v)?,
                        _ if k.starts_with('m') => harmonics.push(SupportHarmonic {
                            m: parse_num(spec, "mode", &k[1..])?,
                            amplitude: parse_num(spec, k, v)?,
                            phase: 0.0,
                        }),
                        _ => return Err(spec_err(spec, format!("unknown key `{k}`"))),
                    }
                }
                Ok(Scenario::Support { omega, harmonics, center })
            }
            "ellipse" => {
                if list.len() != 2 {
                    return Err(spec_err(spec, "expected ellipse:A,B"));
                }
                let a: f64 = parse_num(spec, "a", list[0])?;
                let b: f64 = parse_num(spec, "b", list[1])?;
                if a <= 0.0 || b <= 0.0 {
                    return Err(spec_err(spec, "semi-axes must be positive"));
                }
                Ok(Scenario::Ellipse { a, b })
            }
            "translated_circle" => {
                if list.len() < 2 || list.len() > 3 {
                    return Err(spec_err(spec, "expected translated_circle:CX,CY[,W]"));
                }
                let omega = match list.get(2) {
                    Some(v) => parse_num(spec, "omega", v)?,
                    None => 1,
                };
                Ok(Scenario::TranslatedCircle {
                    offset: [parse_num(spec, "cx", list[0])?, parse_num(spec, "cy", list[1])?],
                    omega,
                })
            }
            "sheared_circle" => {
                let shear: f64 = match list.first() {
                    Some(v) => parse_num(spec, "shear", v)?,
                    None => 0.3,
                };
                if shear.abs() >= 1.0 {
                    return Err(spec_err(spec, "shear must lie in (-1, 1)"));
                }
                Ok(Scenario::ShearedCircle { shear })
            }
            "figure_eight" => Ok(Scenario::FigureEight),
            "random" => {
                let (mut seed, mut omega) = (0, 1);
                for (k, v) in keyed()? {
                    match k {
                        "seed" => seed = parse_num(spec, k, v)?,
                        "omega" => omega = parse_num(spec, k, v)?,
                        _ => return Err(spec_err(spec, format!("unknown key `{k}`"))),
                    }
                }
                Ok(Scenario::Random { seed, omega })
            }
            _ => Err(spec_err(spec, format!("unknown curve family `{kind}`"))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::OmegaCircle { omega, radius } => write!(f, "omega_circle:{omega},{radius}"),
            Scenario::Perturbed { omega, m, eps, phase } => {
                write!(f, "perturbed:omega={omega},m={m},eps={eps:e},phase={phase}")
            }
            Scenario::Support { omega, harmonics, center } => {
                write!(f, "support:omega={omega}")?;
                for h in harmonics {
                    write!(f, ",m{}={:e}", h.m, h.amplitude)?;
                }
                write!(f, ",cx={},cy={}", center[0], center[1])
            }
            Scenario::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            Scenario::TranslatedCircle { offset, omega } => {
                write!(f, "translated_circle:{},{},{omega}", offset[0], offset[1])
            }
            Scenario::ShearedCircle { shear } => write!(f, "sheared_circle:{shear}"),
            Scenario::FigureEight => write!(f, "figure_eight"),
            Scenario::Random { seed, omega } => write!(f, "random:seed={seed},omega={omega}"),
        }
    }
}
