//! Statistics of complex bivariate amplitudes and their correlations.
//!
//! Covers the bivariate normal density, sampling of circular complex
//! normals `z = x + iy`, the mean-normalized intensity `w = |z|² / ⟨|z|²⟩`,
//! the intensity autocorrelation `C(Δ)`, the amplitude autocorrelation
//! `A(Δ)` and the Lorentzian coherence law `C = |A|² = Γ² / (Δ² + Γ²)`.
//!
//! Lagged averages use the overlapping-window estimator with divisor
//! `N - Δ`; the mean is taken over the whole series. The estimator is
//! biased by O(Δ/N) at large lags.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sample `z = x + iy`.
pub type ComplexSample = Complex64;

/// Parameters of a correlated bivariate normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub s_x: f64,
    pub s_y: f64,
    pub rho: f64,
}

impl BivariateParams {
    /// Independent components with common standard deviation `s` and zero means.
    pub fn circular(s: f64) -> Self {
        BivariateParams {
            mu_x: 0.0,
            mu_y: 0.0,
            s_x: s,
            s_y: s,
            rho: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_x > 0.0 && self.s_y > 0.0) {
            return Err(Error::param("s_x/s_y", "standard deviations must be positive"));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::param("rho", format!("need |rho| < 1, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Bivariate normal density at `(x, y)`.
///
/// The normalizing constant is `1 / (2π s_x s_y √(1 - ρ²))`.
pub fn bivariate_pdf(x: f64, y: f64, params: &BivariateParams) -> Result<f64> {
    params.validate()?;
    let BivariateParams { mu_x, mu_y, s_x, s_y, rho } = *params;
    let one_minus = 1.0 - rho * rho;
    let dx = (x - mu_x) / s_x;
    let dy = (y - mu_y) / s_y;
    let g = (dx * dx - 2.0 * rho * dx * dy + dy * dy) / (2.0 * one_minus);
    Ok((-g).exp() / (2.0 * std::f64::consts::PI * s_x * s_y * one_minus.sqrt()))
}

/// `n` samples with `x`, `y` independent `N(0, s²)`.
pub fn sample_complex_bivariate<R: Rng + ?Sized>(s: f64, n: usize, rng: &mut R) -> Result<Vec<ComplexSample>> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param("s", format!("must be positive, got {s}")));
    }
    let normal = Normal::new(0.0, s).map_err(|e| Error::param("s", e.to_string()))?;
    Ok((0..n)
        .map(|_| {
            let x = normal.sample(rng);
            let y = normal.sample(rng);
            Complex64::new(x, y)
        })
        .collect())
}

/// Scale convention for `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityScale {
    /// `w = |z|² / ⟨|z|²⟩`, mean 1; Exp(1) for circular normals.
    #[default]
    UnitMean,
    /// `w = 2|z|² / ⟨|z|²⟩`, mean 2; density `exp(-w/2) / 2` (χ² with two
    /// degrees of freedom).
    ChiSquaredTwo,
}

impl IntensityScale {
    pub fn mean(self) -> f64 {
        match self {
            IntensityScale::UnitMean => 1.0,
            IntensityScale::ChiSquaredTwo => 2.0,
        }
    }

    /// CDF of `w` for circular normal amplitudes under this convention.
    pub fn cdf(self, w: f64) -> f64 {
        if w <= 0.0 {
            0.0
        } else {
            1.0 - (-w / self.mean()).exp()
        }
    }
}

/// Intensities `|z|²` normalized by their sample mean.
pub fn normalized_intensity(samples: &[ComplexSample], scale: IntensityScale) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 samples, got {}", samples.len())));
    }
    let intensities: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    let mean = intensities.iter().sum::<f64>() / intensities.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Degenerate("all samples are zero".into()));
    }
    let factor = scale.mean() / mean;
    Ok(intensities.into_iter().map(|i| i * factor).collect())
}

/// Mean over all samples.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Lagged covariance `⟨[z(n+Δ) - ⟨z⟩][z(n) - ⟨z⟩]⟩` over the `N - Δ`
/// overlapping pairs.
pub fn autocovariance(values: &[f64], lag: usize) -> Result<f64> {
    if lag >= values.len() {
        return Err(Error::TooShort {
            len: values.len(),
            required: lag + 1,
        });
    }
    let m = mean(values);
    Ok(lagged_product_mean(values, lag, m))
}

fn lagged_product_mean(values: &[f64], lag: usize, m: f64) -> f64 {
    let pairs = values.len() - lag;
    let sum: f64 = values[lag..]
        .iter()
        .zip(&values[..pairs])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    sum / pairs as f64
}

/// Autocovariances for lags `0..=max_lag`, sharing one mean.
pub fn autocovariances(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= values.len() {
        return Err(Error::TooShort {
            len: values.len(),
            required: max_lag + 1,
        });
    }
    let m = mean(values);
    Ok((0..=max_lag).map(|lag| lagged_product_mean(values, lag, m)).collect())
}

/// Intensity autocorrelation normalized by the squared mean:
/// `C(Δ) = ⟨[z(n+Δ) - ⟨z⟩][z(n) - ⟨z⟩]⟩ / ⟨z⟩²`.
///
/// `C(0)` is the normalized variance `(⟨z²⟩ - ⟨z⟩²) / ⟨z⟩²`.
pub fn autocorr_c(values: &[f64], lag: usize) -> Result<f64> {
    if lag >= values.len() {
        return Err(Error::TooShort {
            len: values.len(),
            required: lag + 1,
        });
    }
    let m = mean(values);
    if m == 0.0 {
        return Err(Error::Normalization(
            "series mean is zero; C(Δ) needs an intensity-like series".into(),
        ));
    }
    Ok(lagged_product_mean(values, lag, m) / (m * m))
}

/// Denominator used by [`autocorr_amplitude`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AutocorrMode {
    /// Divide by `|⟨z⟩|²`.
    #[default]
    MeanNormalized,
    /// Divide by `⟨|z|²⟩ - |⟨z⟩|²`, for mean-zero amplitudes.
    VarianceNormalized,
}

impl std::str::FromStr for AutocorrMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mean-normalized" => Ok(AutocorrMode::MeanNormalized),
            "variance-normalized" => Ok(AutocorrMode::VarianceNormalized),
            other => Err(format!(
                "unknown autocorrelation mode `{other}` (expected mean-normalized or variance-normalized)"
            )),
        }
    }
}

impl std::fmt::Display for AutocorrMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AutocorrMode::MeanNormalized => "mean-normalized",
            AutocorrMode::VarianceNormalized => "variance-normalized",
        })
    }
}

/// Amplitude autocorrelation `{⟨z(n+Δ) z*(n)⟩ - |⟨z⟩|²} / normalizer`.
pub fn autocorr_amplitude(series: &[ComplexSample], lag: usize, mode: AutocorrMode) -> Result<Complex64> {
    if lag >= series.len() {
        return Err(Error::TooShort {
            len: series.len(),
            required: lag + 1,
        });
    }
    let n = series.len() as f64;
    let m = series.iter().sum::<Complex64>() / n;
    let mean_sq = m.norm_sqr();
    let pairs = series.len() - lag;
    let lagged = series[lag..]
        .iter()
        .zip(&series[..pairs])
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        / pairs as f64;
    let normalizer = match mode {
        AutocorrMode::MeanNormalized => mean_sq,
        AutocorrMode::VarianceNormalized => series.iter().map(|z| z.norm_sqr()).sum::<f64>() / n - mean_sq,
    };
    if !(normalizer > 0.0) {
        return Err(Error::Normalization(format!("{mode} normalizer is zero")));
    }
    Ok((lagged - mean_sq) / normalizer)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(())
}

/// `Γ² / (Δ² + Γ²)`.
pub fn lorentzian_autocorr(delta: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(gamma * gamma / (delta * delta + gamma * gamma))
}

/// `1 / (1 - iΔ/Γ)`, whose modulus squared is [`lorentzian_autocorr`].
pub fn lorentzian_amplitude(delta: f64, gamma: f64) -> Result<Complex64> {
    check_gamma(gamma)?;
    Ok(Complex64::new(1.0, 0.0) / Complex64::new(1.0, -delta / gamma))
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance `alpha` for `n` samples.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use std::f64::consts::PI;

    #[test]
    fn pdf_at_origin() {
        let s = 1.7;
        let p = bivariate_pdf(0.0, 0.0, &BivariateParams::circular(s)).unwrap();
        assert!((p - 1.0 / (2.0 * PI * s * s)).abs() < 1e-15);
    }

    #[test]
    fn pdf_symmetry_and_errors() {
        let p = BivariateParams {
            rho: 0.3,
            s_x: 0.7,
            s_y: 2.0,
            ..BivariateParams::circular(1.0)
        };
        for (x, y) in [(0.3, -1.2), (2.0, 0.5), (-0.1, 0.0)] {
            assert_eq!(bivariate_pdf(x, y, &p).unwrap(), bivariate_pdf(-x, -y, &p).unwrap());
        }
        let bad = BivariateParams { rho: 1.0, ..p };
        assert!(bivariate_pdf(0.0, 0.0, &bad).is_err());
        let bad = BivariateParams { s_x: 0.0, ..p };
        assert!(bivariate_pdf(0.0, 0.0, &bad).is_err());
    }

    /// Composite Simpson's rule over [-8 s, 8 s]² as an independent oracle.
    fn integrate(p: &BivariateParams) -> f64 {
        let n = 800;
        let (ax, ay) = (8.0 * p.s_x, 8.0 * p.s_y);
        let (hx, hy) = (2.0 * ax / n as f64, 2.0 * ay / n as f64);
        let w = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let x = p.mu_x - ax + i as f64 * hx;
                let y = p.mu_y - ay + j as f64 * hy;
                total += w(i) * w(j) * bivariate_pdf(x, y, p).unwrap();
            }
        }
        total * hx * hy / 9.0
    }

    #[test]
    fn pdf_integrates_to_one() {
        for (rho, sx, sy) in [(0.5, 1.0, 1.0), (0.0, 0.5, 2.0), (-0.8, 1.3, 0.4), (0.9, 2.0, 2.0)] {
            let p = BivariateParams {
                mu_x: 0.2,
                mu_y: -0.4,
                s_x: sx,
                s_y: sy,
                rho,
            };
            let total = integrate(&p);
            assert!((total - 1.0).abs() < 1e-6, "rho={rho}: {total}");
        }
    }

    #[test]
    fn bivariate_moments() {
        let mut rng = stream_rng(21, Stream::Bivariates);
        let z = sample_complex_bivariate(1.0, 1_000_000, &mut rng).unwrap();
        let n = z.len() as f64;
        let mx = z.iter().map(|c| c.re).sum::<f64>() / n;
        let my = z.iter().map(|c| c.im).sum::<f64>() / n;
        let mxy = z.iter().map(|c| c.re * c.im).sum::<f64>() / n;
        let mxx = z.iter().map(|c| c.re * c.re).sum::<f64>() / n;
        let myy = z.iter().map(|c| c.im * c.im).sum::<f64>() / n;
        let z2 = z.iter().map(|c| c * c).sum::<Complex64>() / n;
        assert!(mx.abs() < 0.005 && my.abs() < 0.005 && mxy.abs() < 0.005);
        assert!((mxx - 1.0).abs() < 0.01 && (myy - 1.0).abs() < 0.01);
        assert!(z2.norm() < 0.01);
        assert!(sample_complex_bivariate(1.0, 0, &mut rng).unwrap().is_empty());
        assert!(sample_complex_bivariate(0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn unit_modulus_gives_unit_w() {
        let z: Vec<_> = (0..10).map(|k| Complex64::from_polar(1.0, k as f64)).collect();
        for w in normalized_intensity(&z, IntensityScale::UnitMean).unwrap() {
            assert!((w - 1.0).abs() < 1e-12);
        }
        assert!(normalized_intensity(&[Complex64::new(0.0, 0.0); 4], IntensityScale::UnitMean).is_err());
        assert!(normalized_intensity(&[Complex64::new(1.0, 0.0)], IntensityScale::UnitMean).is_err());
    }

    #[test]
    fn w_is_exponential() {
        let mut rng = stream_rng(5, Stream::Bivariates);
        let z = sample_complex_bivariate(0.6, 100_000, &mut rng).unwrap();
        let mut w = normalized_intensity(&z, IntensityScale::UnitMean).unwrap();
        assert!((mean(&w) - 1.0).abs() < 1e-12);
        let d = ks_statistic(&mut w, |x| IntensityScale::UnitMean.cdf(x));
        assert!(d < 0.01, "KS {d}");

        let mut w2 = normalized_intensity(&z, IntensityScale::ChiSquaredTwo).unwrap();
        assert!((mean(&w2) - 2.0).abs() < 1e-12);
        let d2 = ks_statistic(&mut w2, |x| IntensityScale::ChiSquaredTwo.cdf(x));
        assert!((d2 - d).abs() < 1e-9);
    }

    #[test]
    fn constant_series_has_zero_c() {
        let v = vec![2.5; 64];
        for lag in 0..10 {
            assert_eq!(autocorr_c(&v, lag).unwrap(), 0.0);
        }
        assert!(autocorr_c(&[1.0, -1.0, 1.0, -1.0], 1).is_err());
        assert!(autocorr_c(&v, 64).is_err());
    }

    #[test]
    fn c0_is_normalized_variance() {
        let v: Vec<f64> = (0..500).map(|i| 3.0 + (i as f64 * 0.37).sin() + 0.01 * i as f64).collect();
        let m = mean(&v);
        let mean_sq = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        let direct = (mean_sq - m * m) / (m * m);
        let c0 = autocorr_c(&v, 0).unwrap();
        assert!((c0 - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn cosine_half_period_anticorrelates() {
        let v: Vec<f64> = (0..400).map(|n| 1.0 + 0.1 * (2.0 * PI * n as f64 / 20.0).cos()).collect();
        let c0 = autocorr_c(&v, 0).unwrap();
        let c10 = autocorr_c(&v, 10).unwrap();
        assert!((c10 + c0).abs() < 1e-6, "{c10} vs {c0}");
    }

    #[test]
    fn amplitude_autocorr_cases() {
        let mut rng = stream_rng(8, Stream::Bivariates);
        let z = sample_complex_bivariate(1.0, 1000, &mut rng).unwrap();
        let a0 = autocorr_amplitude(&z, 0, AutocorrMode::VarianceNormalized).unwrap();
        assert!((a0 - 1.0).norm() < 1e-12);

        let c = vec![Complex64::new(0.4, -1.1); 50];
        let a = autocorr_amplitude(&c, 3, AutocorrMode::MeanNormalized).unwrap();
        assert!(a.norm() < 1e-12);
        assert!(autocorr_amplitude(&c, 3, AutocorrMode::VarianceNormalized).is_err());
        assert!(autocorr_amplitude(&[Complex64::new(0.0, 0.0); 5], 1, AutocorrMode::MeanNormalized).is_err());
    }

    #[test]
    fn independent_amplitudes_decorrelate() {
        let mut rng = stream_rng(9, Stream::Bivariates);
        let z = sample_complex_bivariate(1.0, 1_000_000, &mut rng).unwrap();
        let a5 = autocorr_amplitude(&z, 5, AutocorrMode::VarianceNormalized).unwrap();
        assert!(a5.norm() < 0.01, "{a5}");
    }

    #[test]
    fn lorentzian_points() {
        assert_eq!(lorentzian_autocorr(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(lorentzian_autocorr(3.0, 3.0).unwrap(), 0.5);
        assert!(lorentzian_autocorr(1.0, 0.0).is_err());
        assert!(lorentzian_amplitude(1.0, -2.0).is_err());
        for i in 0..1000 {
            let d = -50.0 + 0.1 * i as f64;
            let c = lorentzian_autocorr(d, 2.5).unwrap();
            let a = lorentzian_amplitude(d, 2.5).unwrap();
            assert!((a.norm_sqr() - c).abs() <= 4.0 * f64::EPSILON * c);
            assert_eq!(c, lorentzian_autocorr(-d, 2.5).unwrap());
        }
    }

    #[test]
    fn ks_critical_value() {
        assert!((ks_critical(10_000, 0.01) - 0.016276).abs() < 1e-5);
    }
}
