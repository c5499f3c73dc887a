use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rfluct_core::ensembles::{build_level_ladder, EnsembleSpec};
use rfluct_core::estimator::*;
use rfluct_core::rfunction::{evaluate_spectrum, ReactionConfig};
use rfluct_core::rng::{stream_rng, Stream};
use rfluct_core::series::{Grid, SpectrumSeries};
use rfluct_core::Error;
use rustfft::FftPlanner;

/// Intensity of a stationary complex Gaussian amplitude whose correlation is
/// `1/(1 - iΔ/Γ)`: a one-sided exponential spectrum, so `|z|²` has the
/// Lorentzian intensity autocorrelation `Γ²/(Δ² + Γ²)`.
fn ericson_intensity(n: usize, gamma: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, Stream::Auxiliary);
    let mut spec: Vec<Complex64> = (0..n)
        .map(|k| {
            if k == 0 || k >= n / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let omega = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let amp = (-gamma * omega).exp().sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * amp
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|z| z.norm_sqr()).collect()
}

fn lorentz_config() -> EstimatorConfig {
    EstimatorConfig {
        max_lag: Some(60),
        ..Default::default()
    }
}

#[test]
fn recovers_lorentzian_width() {
    let values = ericson_intensity(1 << 18, 12.0, 5);
    let series = SpectrumSeries::new(0.0, 1.0, values);
    let e = estimate_coherence_width(&series, &lorentz_config()).unwrap();
    assert!((e.gamma_samples - 12.0).abs() / 12.0 < 0.02, "Γ̂ = {}", e.gamma_samples);
    assert!(e.fit_residual < 0.02);
    assert!(e.warnings.is_empty());
}

#[test]
fn noiseless_lorentzian_autocorrelation_is_fit_exactly() {
    let c: Vec<f64> = (0..=40).map(|d| 49.0 / (d as f64 * d as f64 + 49.0)).collect();
    let (g, rms) = fit_lorentzian(&c);
    assert!((g - 7.0).abs() < 7.0 * 2e-4);
    assert!(rms < 1e-4);

    let with_pedestal: Vec<f64> = c.iter().map(|l| 0.7 * l + 0.3).collect();
    let (g, b, rms) = fit_lorentzian_with(&with_pedestal, true);
    assert!((g - 7.0).abs() < 7.0 * 2e-4);
    assert!((b - 0.3).abs() < 1e-3);
    assert!(rms < 1e-4);
}

#[test]
fn white_noise_collapses_to_one_sample() {
    let mut rng = stream_rng(11, Stream::Auxiliary);
    let values: Vec<f64> = (0..20_000).map(|_| rng.sample::<f64, _>(StandardNormal) + 5.0).collect();
    let e = estimate_coherence_width(&SpectrumSeries::new(0.0, 1.0, values), &lorentz_config()).unwrap();
    assert!(e.gamma_samples < 1.5, "Γ̂ = {}", e.gamma_samples);
}

#[test]
fn affine_rescaling_leaves_width_unchanged() {
    let values = ericson_intensity(1 << 14, 6.0, 9);
    let base = SpectrumSeries::new(0.0, 1.0, values);
    let shifted = base.map(|v| 3.5 * v + 1000.0);
    let cfg = lorentz_config();
    let a = estimate_coherence_width(&base, &cfg).unwrap();
    let b = estimate_coherence_width(&shifted, &cfg).unwrap();
    assert!((a.gamma_samples - b.gamma_samples).abs() < 1e-6 * a.gamma_samples);
}

#[test]
fn width_is_reported_in_abscissa_units() {
    let values = ericson_intensity(1 << 14, 6.0, 9);
    let cfg = lorentz_config();
    let a = estimate_coherence_width(&SpectrumSeries::new(0.0, 1.0, values.clone()), &cfg).unwrap();
    let b = estimate_coherence_width(&SpectrumSeries::new(100.0, 10.0, values), &cfg).unwrap();
    assert_eq!(a.gamma_samples, b.gamma_samples);
    assert_eq!(b.gamma_hat, 10.0 * b.gamma_samples);
}

#[test]
fn constant_series_is_flat() {
    let s = SpectrumSeries::new(0.0, 1.0, vec![3.0; 400]);
    assert_eq!(estimate_coherence_width(&s, &EstimatorConfig::default()), Err(Error::FlatSeries));
}

#[test]
fn short_series_rejected() {
    let s = SpectrumSeries::new(0.0, 1.0, vec![1.0, 2.0, 3.0, 1.0, 2.0]);
    assert!(matches!(
        estimate_coherence_width(&s, &EstimatorConfig::default()),
        Err(Error::TooShort { .. })
    ));
    let cfg = EstimatorConfig {
        max_lag: Some(50),
        ..Default::default()
    };
    let s = SpectrumSeries::new(0.0, 1.0, (0..100).map(|i| (i as f64).sin()).collect());
    assert_eq!(
        estimate_coherence_width(&s, &cfg),
        Err(Error::TooShort { len: 100, required: 200 })
    );
}

#[test]
fn monotone_series_has_no_spacing() {
    let s = SpectrumSeries::new(0.0, 1.0, (0..100).map(|i| i as f64).collect());
    let d = estimate_mean_spacing(&s, 0.001).unwrap();
    assert_eq!(d.d_hat, None);
    assert_eq!(d.n_peaks, 0);
    assert!(d.diagnostic.is_some());
}

#[test]
fn prominence_ignores_ripples_on_a_peak() {
    // one main peak with a small shoulder bump
    let v = [0.0, 1.0, 5.0, 4.9, 4.95, 3.0, 0.0, 2.0, 0.0];
    let p = peak_prominences(&v);
    assert_eq!(p.len(), 3);
    assert_eq!(p[0], (2, 5.0));
    assert!((p[1].1 - 0.05).abs() < 1e-12);
    assert_eq!(p[2], (7, 2.0));
}

#[test]
fn plateau_counts_once() {
    let v = [0.0, 2.0, 2.0, 2.0, 0.0];
    assert_eq!(peak_prominences(&v), vec![(1, 2.0)]);
}

fn isolated_spectrum(step: f64) -> (SpectrumSeries, f64) {
    let mut spec = EnsembleSpec::with_strength(200, 1.0, 0.01, 0.5, 21, [0.0, 200.0]).unwrap();
    spec.width_dof = 2;
    let levels = build_level_ladder(&spec).unwrap();
    let lo = levels[0].position - 0.5;
    let hi = levels[levels.len() - 1].position + 0.5;
    let n = ((hi - lo) / step).round() as usize + 1;
    let config = ReactionConfig::new(Grid::new(lo, hi, n).unwrap());
    let span = levels[levels.len() - 1].position - levels[0].position;
    (evaluate_spectrum(&levels, &config).unwrap(), span / 199.0)
}

#[test]
fn isolated_levels_give_mean_spacing() {
    let (series, true_d) = isolated_spectrum(0.002);
    let d = estimate_mean_spacing(&series, 0.001).unwrap();
    let d_hat = d.d_hat.unwrap();
    assert!((d_hat - true_d).abs() / true_d < 0.10, "D̂ = {d_hat}, D = {true_d}");

    // same answer on a rescaled copy
    let scaled = series.map(|v| 40.0 * v + 2.0);
    assert_eq!(estimate_mean_spacing(&scaled, 0.001).unwrap().n_peaks, d.n_peaks);
}

fn ericson_session(gamma: f64, seed: u64) -> SpectrumSeries {
    SpectrumSeries::new(0.0, 10.0, ericson_intensity(1 << 18, gamma, seed))
}

#[test]
fn identical_halves_have_zero_drift() {
    let half = ericson_intensity(1 << 13, 4.0, 2);
    let mut values = half.clone();
    values.extend_from_slice(&half);
    let s = SpectrumSeries::new(0.0, 10.0, values);
    let cfg = EstimatorConfig {
        max_lag: Some(20),
        ..Default::default()
    };
    // split lands on sample 2^13
    let r = predict_day(&s, (1 << 13) as f64 * 10.0 - 5.0, &cfg).unwrap();
    assert_eq!(r.relative_drift, Some(0.0));
    assert_eq!(r.verdict, Verdict::Stable);
}

#[test]
fn stationary_and_doubled_width() {
    let cfg = EstimatorConfig {
        max_lag: Some(40),
        ..Default::default()
    };
    let train = (1 << 17) as f64 * 10.0 - 5.0;
    let r = predict_day(&ericson_session(5.0, 3), train, &cfg).unwrap();
    assert!(r.relative_drift.unwrap() < 0.05, "{:?}", r.relative_drift);

    let a = ericson_session(5.0, 3);
    let b = ericson_session(10.0, 4);
    let mut v = a.values[..1 << 17].to_vec();
    v.extend_from_slice(&b.values[1 << 17..]);
    let r = predict_day(&SpectrumSeries::new(0.0, 10.0, v), train, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Drifted);
}

#[test]
fn train_window_bounds() {
    let s = ericson_session(5.0, 3);
    let cfg = EstimatorConfig::default();
    for bad in [0.0, 1799.0, s.end() - s.start, f64::NAN] {
        assert!(matches!(predict_day(&s, bad, &cfg), Err(Error::Parameter { .. })), "{bad}");
    }
}

#[test]
fn flat_holdout_is_withheld() {
    let mut values = ericson_intensity(4096, 4.0, 8);
    values.extend(std::iter::repeat_n(1.0, 4096));
    let s = SpectrumSeries::new(0.0, 10.0, values);
    let cfg = EstimatorConfig {
        max_lag: Some(20),
        ..Default::default()
    };
    let r = predict_day(&s, 4096.0 * 10.0 - 5.0, &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Withheld);
    assert!(r.holdout_error.is_some());
    assert!(r.relative_drift.is_none());
}
