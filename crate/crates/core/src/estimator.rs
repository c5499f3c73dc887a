//! Strength-function estimation from an observed series.
//!
//! The coherence width Γ̂ comes from a one-parameter Lorentzian fit to the
//! normalized intensity autocorrelation `C(Δ)/C(0) ≈ Γ²/(Δ² + Γ²)`: a scan
//! over 200 log-spaced widths in `[1, max_lag]` samples followed by
//! golden-section refinement. The mean spacing D̂ is the mean separation of
//! prominent local maxima. In the overlapped regime those maxima are
//! fluctuation peaks, not levels, and the estimate is flagged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{log_space, scan_then_refine};
use crate::fluctuation::autocovariances;
use crate::series::SpectrumSeries;

const SCAN_POINTS: usize = 200;
const FIT_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Largest lag in samples; `None` means an eighth of the window.
    pub max_lag: Option<usize>,
    /// Subtract a least-squares line before correlating.
    pub detrend: bool,
    /// Fit `(1 - b)·L(Δ) + b`, profiling out a constant pedestal `b` left by
    /// structure slower than the lag range.
    pub pedestal: bool,
    /// RMS fit residual above which a poor-fit warning is attached.
    pub residual_ceiling: f64,
    /// Minimum peak prominence as a fraction of the series range.
    pub min_prominence: f64,
    /// Relative drift above which a prediction is `drifted`.
    pub threshold: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            max_lag: None,
            detrend: true,
            pedestal: false,
            residual_ceiling: 0.1,
            min_prominence: 0.001,
            threshold: 0.25,
        }
    }
}

/// Fitted parameters for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthEstimate {
    /// Coherence width in abscissa units.
    pub gamma_hat: f64,
    /// Coherence width in samples.
    pub gamma_samples: f64,
    pub d_hat: Option<f64>,
    pub ratio: Option<f64>,
    pub fit_residual: f64,
    pub window: [f64; 2],
    pub n_lags_used: usize,
    pub n_peaks: usize,
    /// Γ̂ exceeds the detected peak spacing, so D̂ reflects fluctuation
    /// maxima rather than levels.
    pub overlapped: bool,
    pub warnings: Vec<String>,
}

/// Peak-spacing estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingEstimate {
    pub d_hat: Option<f64>,
    pub n_peaks: usize,
    pub diagnostic: Option<String>,
}

/// Least-squares line removed from `values`.
pub fn detrend_linear(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return values.to_vec();
    }
    let nf = n as f64;
    let x_mean = (nf - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    values
        .iter()
        .enumerate()
        .map(|(i, &y)| y - y_mean - slope * (i as f64 - x_mean))
        .collect()
}

fn resolve_max_lag(len: usize, config: &EstimatorConfig) -> Result<usize> {
    let max_lag = config.max_lag.unwrap_or(len / 8);
    if max_lag < 2 {
        return Err(Error::TooShort { len, required: 16 });
    }
    if len < 4 * max_lag {
        return Err(Error::TooShort {
            len,
            required: 4 * max_lag,
        });
    }
    Ok(max_lag)
}

/// Applies the configured detrending to `series`.
pub fn prepare(series: &SpectrumSeries, config: &EstimatorConfig) -> Vec<f64> {
    if config.detrend {
        detrend_linear(&series.values)
    } else {
        series.values.clone()
    }
}

/// `C(Δ)/C(0)` for `Δ = 0..=max_lag`, after optional detrending.
pub fn normalized_autocorrelation(values: &[f64], max_lag: usize, detrend: bool) -> Result<Vec<f64>> {
    let work = if detrend { detrend_linear(values) } else { values.to_vec() };
    normalized_autocovariance(&work, values, max_lag)
}

fn normalized_autocovariance(work: &[f64], values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let cov = autocovariances(work, max_lag)?;
    let c0 = cov[0];
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    // variance indistinguishable from rounding noise
    if !(c0 > 1e-24 * scale * scale) {
        return Err(Error::FlatSeries);
    }
    Ok(cov.into_iter().map(|c| c / c0).collect())
}

/// Least-squares Lorentzian width (in samples) for a normalized
/// autocorrelation; returns `(Γ, RMS residual)`.
pub fn fit_lorentzian(normalized: &[f64]) -> (f64, f64) {
    let (gamma, _, residual) = fit_lorentzian_with(normalized, false);
    (gamma, residual)
}

/// Optimal pedestal for fixed Lorentzian values: minimizes
/// `Σ (c - L - b(1 - L))²`, clamped to `[0, 1)`.
fn pedestal_for(normalized: &[f64], lorentz: impl Fn(f64) -> f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (lag, &c) in normalized.iter().enumerate() {
        let l = lorentz(lag as f64);
        num += (c - l) * (1.0 - l);
        den += (1.0 - l) * (1.0 - l);
    }
    if den > 0.0 {
        (num / den).clamp(0.0, 0.99)
    } else {
        0.0
    }
}

/// As [`fit_lorentzian`], optionally profiling out a constant pedestal.
/// Returns `(Γ, pedestal, RMS residual)`.
pub fn fit_lorentzian_with(normalized: &[f64], pedestal: bool) -> (f64, f64, f64) {
    let max_lag = (normalized.len() - 1) as f64;
    let model = |gamma: f64| {
        let g2 = gamma * gamma;
        move |d: f64| g2 / (d * d + g2)
    };
    let pedestal_at = |gamma: f64| if pedestal { pedestal_for(normalized, model(gamma)) } else { 0.0 };
    let cost = |gamma: f64| {
        let l = model(gamma);
        let b = pedestal_at(gamma);
        normalized
            .iter()
            .enumerate()
            .map(|(lag, &c)| {
                let r = c - ((1.0 - b) * l(lag as f64) + b);
                r * r
            })
            .sum::<f64>()
    };
    let candidates = log_space(1.0, max_lag.max(1.0), SCAN_POINTS);
    let (gamma, sse) = scan_then_refine(cost, &candidates, FIT_REL_TOL);
    (gamma, pedestal_at(gamma), (sse / normalized.len() as f64).sqrt())
}

/// Coherence width of `series` from its autocorrelation.
pub fn estimate_coherence_width(series: &SpectrumSeries, config: &EstimatorConfig) -> Result<StrengthEstimate> {
    let max_lag = resolve_max_lag(series.len(), config)?;
    let work = prepare(series, config);
    let normalized = normalized_autocovariance(&work, &series.values, max_lag)?;
    let (gamma_samples, _pedestal, fit_residual) = fit_lorentzian_with(&normalized, config.pedestal);
    let mut warnings = Vec::new();
    if fit_residual > config.residual_ceiling {
        warnings.push(format!(
            "poor Lorentzian fit: RMS residual {fit_residual:.4} exceeds {}",
            config.residual_ceiling
        ));
    }
    Ok(StrengthEstimate {
        gamma_hat: gamma_samples * series.step,
        gamma_samples,
        d_hat: None,
        ratio: None,
        fit_residual,
        window: [series.start, series.end()],
        n_lags_used: normalized.len(),
        n_peaks: 0,
        overlapped: false,
        warnings,
    })
}

/// Topographic prominence of each local maximum, as `(index, prominence)`.
pub fn peak_prominences(values: &[f64]) -> Vec<(usize, f64)> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            // extend across a plateau
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let peak = values[i];
                let mut left_min = peak;
                for k in (0..i).rev() {
                    if values[k] > peak {
                        break;
                    }
                    left_min = left_min.min(values[k]);
                }
                let mut right_min = peak;
                for &v in &values[j + 1..] {
                    if v > peak {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                out.push((i, peak - left_min.max(right_min)));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Mean separation of local maxima whose prominence exceeds
/// `min_prominence × (max - min)`.
pub fn estimate_mean_spacing(series: &SpectrumSeries, min_prominence: f64) -> Result<SpacingEstimate> {
    if series.len() < 16 {
        return Err(Error::TooShort {
            len: series.len(),
            required: 16,
        });
    }
    let (lo, hi) = series
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let floor = min_prominence * (hi - lo);
    let peaks: Vec<usize> = peak_prominences(&series.values)
        .into_iter()
        .filter(|&(_, p)| p > floor)
        .map(|(i, _)| i)
        .collect();
    if peaks.len() < 3 {
        return Ok(SpacingEstimate {
            d_hat: None,
            n_peaks: peaks.len(),
            diagnostic: Some(format!("only {} prominent peaks; need 3", peaks.len())),
        });
    }
    let span = (peaks[peaks.len() - 1] - peaks[0]) as f64 * series.step;
    Ok(SpacingEstimate {
        d_hat: Some(span / (peaks.len() - 1) as f64),
        n_peaks: peaks.len(),
        diagnostic: None,
    })
}

/// Γ̂, D̂ and their ratio for one window.
pub fn strength_function(series: &SpectrumSeries, config: &EstimatorConfig) -> Result<StrengthEstimate> {
    let mut estimate = estimate_coherence_width(series, config)?;
    let spacing = estimate_mean_spacing(series, config.min_prominence)?;
    estimate.n_peaks = spacing.n_peaks;
    match spacing.d_hat {
        Some(d) => {
            estimate.d_hat = Some(d);
            estimate.ratio = Some(estimate.gamma_hat / d);
            if estimate.gamma_hat > d {
                estimate.overlapped = true;
                estimate.warnings.push(
                    "coherence width exceeds detected peak spacing; spacing reflects fluctuation maxima".into(),
                );
            }
        }
        None => estimate.warnings.extend(spacing.diagnostic),
    }
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Drifted,
    Withheld,
}

/// Outcome of comparing the opening window against the rest of the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub train_estimate: Option<StrengthEstimate>,
    pub holdout_estimate: Option<StrengthEstimate>,
    pub train_error: Option<String>,
    pub holdout_error: Option<String>,
    pub relative_drift: Option<f64>,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Shortest opening window accepted by [`predict_day`], in seconds.
pub const MIN_TRAIN_SECONDS: f64 = 1800.0;

/// Estimates on `[start, start + train_seconds)` and on the remainder and
/// compares their coherence widths.
pub fn predict_day(series: &SpectrumSeries, train_seconds: f64, config: &EstimatorConfig) -> Result<PredictionReport> {
    let session = series.end() - series.start;
    if !(train_seconds >= MIN_TRAIN_SECONDS && train_seconds <= session / 2.0) {
        return Err(Error::param(
            "train_seconds",
            format!("must lie in [{MIN_TRAIN_SECONDS}, {}], got {train_seconds}", session / 2.0),
        ));
    }
    let split = ((train_seconds / series.step) - 1e-9).ceil() as usize;
    let train = series.slice(0, split);
    let holdout = series.slice(split, series.len());

    let train_result = strength_function(&train, config);
    let holdout_result = strength_function(&holdout, config);
    let (train_estimate, train_error) = split_result(train_result);
    let (holdout_estimate, holdout_error) = split_result(holdout_result);

    let relative_drift = match (&train_estimate, &holdout_estimate) {
        (Some(t), Some(h)) => Some((t.gamma_hat - h.gamma_hat).abs() / h.gamma_hat),
        _ => None,
    };
    let verdict = match relative_drift {
        Some(d) if d <= config.threshold => Verdict::Stable,
        Some(_) => Verdict::Drifted,
        None => Verdict::Withheld,
    };
    Ok(PredictionReport {
        train_estimate,
        holdout_estimate,
        train_error,
        holdout_error,
        relative_drift,
        threshold: config.threshold,
        verdict,
    })
}

fn split_result(r: Result<StrengthEstimate>) -> (Option<StrengthEstimate>, Option<String>) {
    match r {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    }
}
