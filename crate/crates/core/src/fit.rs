//! Exponential decay rates from time series by least squares on the log.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest value admitted into a fit unless the caller says otherwise.
pub const DEFAULT_FLOOR: f64 = 1e-12;
/// Minimum number of samples for a conclusive fit.
pub const MIN_SAMPLES: usize = 10;
/// Coefficient of determination below which a fit is flagged.
pub const GOODNESS_MIN: f64 = 0.999;
/// Fraction of the run discarded as transient by the automatic window.
pub const TRANSIENT_FRACTION: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// Discard the first 20% of the run, stop at the floor, then trim the
    /// tail while the log-linear goodness is below 0.999.
    Auto,
    Range { t_a: f64, t_b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub column: String,
    pub t_a: f64,
    pub t_b: f64,
    /// Negated slope of `log v` against `t`.
    pub rate: f64,
    /// Coefficient of determination of the log-linear fit.
    pub goodness: f64,
    pub floor: f64,
    pub samples: usize,
}

impl DecayFit {
    pub fn is_conclusive(&self) -> bool {
        self.goodness >= GOODNESS_MIN
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitOutcome {
    Fit(DecayFit),
    Inconclusive { column: String, reason: String },
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&DecayFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::Inconclusive { .. } => None,
        }
    }

    /// The rate of a fit that also meets the goodness threshold.
    pub fn conclusive_rate(&self) -> Option<f64> {
        self.fit().filter(|f| f.is_conclusive()).map(|f| f.rate)
    }
}

/// `(slope, intercept, r²)` of ordinary least squares.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, my - slope * mx, r2)
}

fn fit_points(column: &str, pts: &[(f64, f64)], floor: f64) -> DecayFit {
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, v.ln())).collect();
    let (slope, _, r2) = linear_fit(&logs);
    DecayFit {
        column: column.to_string(),
        t_a: pts[0].0,
        t_b: pts[pts.len() - 1].0,
        rate: -slope,
        goodness: r2,
        floor,
        samples: pts.len(),
    }
}

/// Fit `v(t) ≈ C e^{−rate t}` to the `(t, v)` samples of one column.
pub fn fit_decay_rate(
    series: &[(f64, f64)],
    column: &str,
    window: FitWindow,
    floor: f64,
) -> Result<FitOutcome> {
    if !(floor > 0.0) {
        return Err(Error::InvalidArgument(format!("floor must be positive, got {floor}")));
    }
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidArgument("time stamps must be strictly increasing".into()));
    }
    let inconclusive = |reason: String| {
        Ok(FitOutcome::Inconclusive {
            column: column.to_string(),
            reason,
        })
    };
    let pts: Vec<(f64, f64)> = match window {
        FitWindow::Range { t_a, t_b } => {
            if !(t_b > t_a) {
                return Err(Error::InvalidArgument(format!("empty window [{t_a}, {t_b}]")));
            }
            series
                .iter()
                .copied()
                .filter(|&(t, v)| t >= t_a && t <= t_b && v.abs() > floor)
                .map(|(t, v)| (t, v.abs()))
                .collect()
        }
        FitWindow::Auto => {
            let (Some(first), Some(last)) = (series.first(), series.last()) else {
                return inconclusive("empty series".into());
            };
            let start = first.0 + TRANSIENT_FRACTION * (last.0 - first.0);
            series
                .iter()
                .copied()
                .filter(|&(t, _)| t >= start)
                .take_while(|&(_, v)| v.abs() > floor)
                .map(|(t, v)| (t, v.abs()))
                .collect()
        }
    };
    if pts.len() < MIN_SAMPLES {
        return inconclusive(format!(
            "{} samples above floor {floor:e} in window, need {MIN_SAMPLES}",
            pts.len()
        ));
    }
    let mut fit = fit_points(column, &pts, floor);
    if window == FitWindow::Auto {
        // trim the tail in 10% steps while the fit is poor
        let mut keep = pts.len();
        while !fit.is_conclusive() {
            let next = keep - (keep / 10).max(1);
            if next < MIN_SAMPLES {
                break;
            }
            keep = next;
            let trimmed = fit_points(column, &pts[..keep], floor);
            if trimmed.goodness > fit.goodness {
                fit = trimmed;
            }
        }
    }
    Ok(FitOutcome::Fit(fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> Vec<(f64, f64)> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_exponential() {
        let s = sample(|t| 3.0 * (-2.0 * t).exp(), 4.0, 100);
        let f = fit_decay_rate(&s, "v", FitWindow::Auto, DEFAULT_FLOOR).unwrap();
        let f = f.fit().unwrap();
        assert!((f.rate - 2.0).abs() < 1e-10);
        assert!(f.is_conclusive());
        assert!((f.t_a - 0.8).abs() < 1e-12);
    }

    #[test]
    fn slow_mode_dominates_late_window() {
        let s = sample(|t| (-2.0 * t).exp() + (-10.0 * t).exp(), 4.0, 400);
        let f = fit_decay_rate(&s, "v", FitWindow::Range { t_a: 2.0, t_b: 4.0 }, DEFAULT_FLOOR).unwrap();
        assert!((f.fit().unwrap().rate - 2.0).abs() < 1e-3);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let s = sample(|_| 0.7, 1.0, 50);
        let f = fit_decay_rate(&s, "v", FitWindow::Auto, DEFAULT_FLOOR).unwrap();
        assert!(f.fit().unwrap().rate.abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_is_inconclusive() {
        let s = sample(|t| (-t).exp(), 1.0, 8);
        let f = fit_decay_rate(&s, "v", FitWindow::Auto, DEFAULT_FLOOR).unwrap();
        assert!(matches!(f, FitOutcome::Inconclusive { .. }));
        assert_eq!(f.conclusive_rate(), None);
    }

    #[test]
    fn floor_truncates_the_auto_window() {
        let s = sample(|t| (-30.0 * t).exp(), 2.0, 200);
        let f = fit_decay_rate(&s, "v", FitWindow::Auto, 1e-12).unwrap();
        let f = f.fit().unwrap();
        assert!(f.t_b < 27.7 / 30.0 + 0.02);
        assert!((f.rate - 30.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unsorted_times() {
        let s = vec![(0.0, 1.0), (0.0, 0.5)];
        assert!(fit_decay_rate(&s, "v", FitWindow::Auto, 1e-12).is_err());
    }
}
