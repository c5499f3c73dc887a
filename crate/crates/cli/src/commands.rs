//! Subcommand drivers. Each takes a fully merged [`RunConfig`] and writes
//! its artifacts under the configured output directory.

use std::path::{Path, PathBuf};

use rfluct_core::ensembles::{build_level_ladder, ladder_stats, LadderStats};
use rfluct_core::estimator::{predict_day, strength_function, PredictionReport, StrengthEstimate, Verdict};
use rfluct_core::fluctuation::{
    autocorr_amplitude, autocorr_c, ks_critical, ks_statistic, lorentzian_amplitude, lorentzian_autocorr, mean,
    normalized_intensity, sample_complex_bivariate,
};
use rfluct_core::index::compose_index;
use rfluct_core::rfunction::{evaluate_spectrum, local_maxima, ReactionConfig};
use rfluct_core::rng::{stream_rng, Stream};
use rfluct_core::series::Grid;
use serde::Serialize;

use crate::config::{EstimatorSection, Mode, RunConfig};
use crate::error::{ExitCode, Result};
use crate::ingest::{ingest_csv, ColumnSpec, IngestedSeries};
use crate::output::{ensure_dir, write_csv, write_json, Stamp};

/// Files written by a subcommand plus any warnings worth surfacing.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub exit: Option<ExitCode>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    strength: f64,
    n_levels: usize,
    ladder: Option<LadderStats>,
    local_maxima: usize,
    spectrum_file: String,
    levels_file: String,
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Spectra for every configured strength from one ladder seed; the level
/// positions are shared across strengths.
pub fn simulate_nuclear(config: &RunConfig) -> Result<Outcome> {
    let config = config.resolved_for(Some(Mode::Nuclear));
    let seed = config.require_seed()?;
    let section = config.nuclear.as_ref().expect("resolved");
    let hash = config.hash();
    let dir = config.out_dir();
    ensure_dir(&dir)?;

    let [lo, hi] = section.window();
    let grid = Grid::new(lo, hi, section.n_points)?;
    let reaction = ReactionConfig {
        wave_number: section.wave_number,
        include_prefactor: section.include_prefactor,
        grid,
    };
    reaction.validate()?;

    let mut outcome = Outcome::default();
    let mut summaries = Vec::new();
    for (i, &strength) in section.strengths.iter().enumerate() {
        let spec = section.ensemble(strength, seed)?;
        let levels = build_level_ladder(&spec)?;
        let spectrum = evaluate_spectrum(&levels, &reaction)?;
        let stamp = Stamp::new("nuclear-spectrum", &hash, Some(seed));
        let extra = [("strength", strength.to_string())];
        let spectrum_path = write_csv(
            dir.join(format!("spectrum_{i}.csv")),
            &stamp,
            &extra,
            &["energy", "cross_section"],
            spectrum.values.iter().enumerate().map(|(k, &v)| vec![spectrum.abscissa(k), v]),
        )?;
        let levels_path = write_csv(
            dir.join(format!("levels_{i}.csv")),
            &Stamp::new("nuclear-levels", &hash, Some(seed)),
            &extra,
            &["position", "width_elastic", "width_inelastic", "width_eliminated", "sign"],
            levels.iter().map(|l| {
                vec![l.position, l.width_elastic, l.width_inelastic, l.width_eliminated, l.inelastic_sign]
            }),
        )?;
        summaries.push(SpectrumSummary {
            strength,
            n_levels: levels.len(),
            ladder: ladder_stats(&levels),
            local_maxima: local_maxima(&spectrum.values).len(),
            spectrum_file: file_name(&spectrum_path),
            levels_file: file_name(&levels_path),
        });
        outcome.files.extend([spectrum_path, levels_path]);
    }
    #[derive(Serialize)]
    struct Body<'a> {
        spectra: &'a [SpectrumSummary],
    }
    outcome.files.push(write_json(
        dir.join("nuclear.json"),
        &Stamp::new("nuclear-summary", &hash, Some(seed)),
        &Body { spectra: &summaries },
    )?);
    Ok(outcome)
}

#[derive(Serialize)]
struct ComponentSummary {
    label: String,
    seed: u64,
    n_levels: usize,
    ladder: Option<LadderStats>,
    file: Option<String>,
}

/// A synthetic session: the composed index and optionally each component.
pub fn simulate_index(config: &RunConfig) -> Result<Outcome> {
    let config = config.resolved_for(Some(Mode::Index));
    let seed = config.require_seed()?;
    let section = config.index.as_ref().expect("resolved");
    let hash = config.hash();
    let dir = config.out_dir();
    ensure_dir(&dir)?;

    let model = section.model(seed);
    let session = compose_index(&model)?;
    let mut outcome = Outcome {
        warnings: session.warnings.clone(),
        ..Default::default()
    };
    let s = &session.series;
    outcome.files.push(write_csv(
        dir.join("index.csv"),
        &Stamp::new("index-session", &hash, Some(seed)),
        &[],
        &["timestamp_seconds", "index_value"],
        s.values.iter().enumerate().map(|(k, &v)| vec![s.abscissa(k), v]),
    )?);

    let mut components = Vec::new();
    for (i, (spec, c)) in model.components.iter().zip(&session.components).enumerate() {
        let file = if section.write_components {
            let path = write_csv(
                dir.join(format!("component_{i}_{}.csv", c.label)),
                &Stamp::new("index-component", &hash, Some(seed)),
                &[("label", c.label.to_string()), ("component_seed", spec.seed.to_string())],
                &["timestamp_seconds", "component_value"],
                c.series.values.iter().enumerate().map(|(k, &v)| vec![c.series.abscissa(k), v]),
            )?;
            let name = file_name(&path);
            outcome.files.push(path);
            Some(name)
        } else {
            None
        };
        components.push(ComponentSummary {
            label: c.label.to_string(),
            seed: spec.seed,
            n_levels: c.n_levels,
            ladder: c.ladder,
            file,
        });
    }
    #[derive(Serialize)]
    struct Body<'a> {
        samples: usize,
        components: &'a [ComponentSummary],
        warnings: &'a [String],
    }
    outcome.files.push(write_json(
        dir.join("index.json"),
        &Stamp::new("index-summary", &hash, Some(seed)),
        &Body {
            samples: s.len(),
            components: &components,
            warnings: &session.warnings,
        },
    )?);
    Ok(outcome)
}

#[derive(Serialize)]
struct StatsSummary {
    n_samples: usize,
    mean_x: f64,
    mean_y: f64,
    mean_xy: f64,
    mean_z2_modulus: f64,
    /// Standard error of `mean_x`, `mean_y` and `mean_xy`; each component
    /// of ⟨z²⟩ has twice this.
    standard_error: f64,
    ks_statistic: f64,
    ks_critical_1pct: f64,
    ks_pass: bool,
    w_max_over_min: f64,
}

/// Reproductions of the complex-normal statistics: a histogram of `w`
/// against its exponential law, empirical correlations, and the
/// Lorentzian identity table.
pub fn stats_demo(config: &RunConfig) -> Result<Outcome> {
    let config = config.resolved_for(Some(Mode::Stats));
    let seed = config.require_seed()?;
    let st = config.stats.as_ref().expect("resolved");
    let mode = config.estimator.autocorr_mode;
    let hash = config.hash();
    let dir = config.out_dir();
    ensure_dir(&dir)?;
    let stamp = |kind: &str| Stamp::new(kind, &hash, Some(seed));
    let mut outcome = Outcome::default();

    let samples = sample_complex_bivariate(st.sigma, st.n_samples, &mut stream_rng(seed, Stream::Bivariates))?;
    let w = normalized_intensity(&samples, st.intensity_scale)?;

    let bins = st.histogram_bins.max(1);
    let width = st.histogram_max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &w {
        let b = (v / width) as usize;
        if b < bins {
            counts[b] += 1;
        }
    }
    let n = w.len() as f64;
    let scale = st.intensity_scale;
    outcome.files.push(write_csv(
        dir.join("w_histogram.csv"),
        &stamp("w-histogram"),
        &[("intensity_scale", format!("{scale:?}"))],
        &["bin_lo", "bin_hi", "density", "expected_density"],
        counts.iter().enumerate().map(|(b, &c)| {
            let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
            vec![lo, hi, c as f64 / (n * width), (scale.cdf(hi) - scale.cdf(lo)) / width]
        }),
    )?);

    let max_lag = st.max_lag.min(samples.len().saturating_sub(1));
    let mut rows = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let a = autocorr_amplitude(&samples, lag, mode)?;
        rows.push(vec![lag as f64, a.re, a.im, autocorr_c(&w, lag)?]);
    }
    outcome.files.push(write_csv(
        dir.join("correlations.csv"),
        &stamp("empirical-correlations"),
        &[("autocorr_mode", mode.to_string())],
        &["lag", "amplitude_re", "amplitude_im", "intensity_c"],
        rows.into_iter(),
    )?);

    let gamma = st.lorentz_width;
    let points = st.table_points.max(2);
    let mut table = Vec::with_capacity(points);
    for k in 0..points {
        let delta = st.table_max_delta * k as f64 / (points - 1) as f64;
        let c = lorentzian_autocorr(delta, gamma)?;
        let a = lorentzian_amplitude(delta, gamma)?;
        table.push(vec![delta, c, a.re, a.im, a.norm_sqr(), a.norm_sqr() - c]);
    }
    outcome.files.push(write_csv(
        dir.join("lorentz_identity.csv"),
        &stamp("lorentz-identity"),
        &[("gamma", gamma.to_string())],
        &["delta", "c", "a_re", "a_im", "a_abs_sq", "difference"],
        table.into_iter(),
    )?);

    let xs: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let ys: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let xy: Vec<f64> = samples.iter().map(|z| z.re * z.im).collect();
    let z2 = samples.iter().map(|z| z * z).sum::<rfluct_core::fluctuation::ComplexSample>() / n;
    let mut unit_w: Vec<f64> = w.iter().map(|v| v / scale.mean()).collect();
    let ks = ks_statistic(&mut unit_w, |x| 1.0 - (-x).exp());
    let critical = ks_critical(w.len(), 0.01);
    let (lo, hi) = w.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let summary = StatsSummary {
        n_samples: samples.len(),
        mean_x: mean(&xs),
        mean_y: mean(&ys),
        mean_xy: mean(&xy),
        mean_z2_modulus: z2.norm(),
        standard_error: st.sigma * st.sigma / n.sqrt(),
        ks_statistic: ks,
        ks_critical_1pct: critical,
        ks_pass: ks < critical,
        w_max_over_min: hi / lo,
    };
    outcome.files.push(write_json(dir.join("stats.json"), &stamp("stats-summary"), &summary)?);
    Ok(outcome)
}

#[derive(Serialize)]
struct EstimateBody<'a> {
    input: &'a IngestedSeries,
    estimator: &'a EstimatorSection,
    estimate: &'a StrengthEstimate,
}

/// Γ̂, D̂ and their ratio for an ingested series.
pub fn estimate(config: &RunConfig, input: &Path, columns: &ColumnSpec) -> Result<Outcome> {
    let config = config.resolved_for(None);
    let ingested = ingest_csv(input, columns)?;
    let est = strength_function(&ingested.series, &config.estimator.estimator())?;
    let dir = config.out_dir();
    ensure_dir(&dir)?;
    let mut warnings = ingested.warnings.clone();
    warnings.extend(est.warnings.iter().cloned());
    let path = write_json(
        dir.join("estimate.json"),
        &Stamp::new("estimate", &config.hash(), config.seed),
        &EstimateBody {
            input: &ingested,
            estimator: &config.estimator,
            estimate: &est,
        },
    )?;
    Ok(Outcome {
        files: vec![path],
        warnings,
        exit: None,
    })
}

#[derive(Serialize)]
struct PredictBody<'a> {
    input: &'a IngestedSeries,
    estimator: &'a EstimatorSection,
    train_window: f64,
    report: &'a PredictionReport,
}

/// Opening-window versus rest-of-session comparison; the exit status
/// carries the verdict.
pub fn predict(config: &RunConfig, input: &Path, columns: &ColumnSpec) -> Result<Outcome> {
    let config = config.resolved_for(None);
    let ingested = ingest_csv(input, columns)?;
    let train_window = config.estimator.train_window;
    let report = predict_day(&ingested.series, train_window, &config.estimator.estimator())?;
    let dir = config.out_dir();
    ensure_dir(&dir)?;
    let mut warnings = ingested.warnings.clone();
    for e in report.train_estimate.iter().chain(&report.holdout_estimate) {
        warnings.extend(e.warnings.iter().cloned());
    }
    let path = write_json(
        dir.join("predict.json"),
        &Stamp::new("predict", &config.hash(), config.seed),
        &PredictBody {
            input: &ingested,
            estimator: &config.estimator,
            train_window,
            report: &report,
        },
    )?;
    let exit = match report.verdict {
        Verdict::Stable => ExitCode::Ok,
        Verdict::Drifted => ExitCode::Drifted,
        Verdict::Withheld => ExitCode::Withheld,
    };
    Ok(Outcome {
        files: vec![path],
        warnings,
        exit: Some(exit),
    })
}

/// Dispatches on the configured mode.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    match config.resolved_mode() {
        Some(Mode::Nuclear) => simulate_nuclear(config),
        Some(Mode::Index) => simulate_index(config),
        Some(Mode::Stats) => stats_demo(config),
        None => Err(crate::error::CliError::Config(
            "no mode: set `mode`, add a mode section, or pass --mode".into(),
        )),
    }
}
