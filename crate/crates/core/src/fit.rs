//! Least-squares decay-rate fits on log-transformed series.

use serde::Serialize;

use crate::error::{FlockError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// log v = intercept − rate·t.
    Exponential,
    /// log v = intercept − rate·log(1 + t).
    Algebraic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub mode: FitMode,
    pub rate: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits the samples with `t` in `window` (inclusive); needs at least five, all positive.
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64), mode: FitMode) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= window.0 && *t <= window.1).collect();
    if pts.len() < 5 {
        return Err(FlockError::Fit(format!("{} samples in window, need at least 5", pts.len())));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(FlockError::Fit(format!("nonpositive sample {v} at t = {t}")));
    }
    let abscissa = |t: f64| match mode {
        FitMode::Exponential => t,
        FitMode::Algebraic => (1.0 + t).ln(),
    };
    let xs: Vec<f64> = pts.iter().map(|(t, _)| abscissa(*t)).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(FlockError::Fit("window has a single abscissa".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit {
        mode,
        rate: -slope,
        intercept,
        residual_rms: (rss / n).sqrt(),
        window,
        samples: pts.len(),
    })
}

/// Default trailing window [T/2, T].
pub fn trailing_window(t_end: f64) -> (f64, f64) {
    (0.5 * t_end, t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_example() {
        let s: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = i as f64 * 0.5;
                (t, 3.0 * (-0.7 * t).exp())
            })
            .collect();
        let f = fit_rate(&s, (0.0, 10.0), FitMode::Exponential).unwrap();
        assert_abs_diff_eq!(f.rate, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(f.intercept, 3f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let s: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.5)).collect();
        assert_abs_diff_eq!(fit_rate(&s, (0.0, 9.0), FitMode::Exponential).unwrap().rate, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn algebraic_example() {
        let s: Vec<(f64, f64)> = (0..30)
            .map(|i| {
                let t = i as f64;
                (t, (1.0 + t).powf(-0.5))
            })
            .collect();
        let f = fit_rate(&s, (0.0, 29.0), FitMode::Algebraic).unwrap();
        assert_abs_diff_eq!(f.rate, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_windows() {
        let s: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, if i == 7 { 0.0 } else { 1.0 })).collect();
        assert!(matches!(fit_rate(&s, (0.0, 9.0), FitMode::Exponential), Err(FlockError::Fit(_))));
        assert!(fit_rate(&s, (0.0, 3.0), FitMode::Exponential).is_err());
    }
}
