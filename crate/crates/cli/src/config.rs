//! Run configuration.
//!
//! A run is described by one TOML file (JSON is accepted when the path ends
//! in `.json`). At most one of the `[nuclear]`, `[index]` and `[stats]`
//! sections may be present; a subcommand whose section is missing falls
//! back to the built-in preset for that mode.
//!
//! ```toml
//! mode = "index"
//! seed = 7
//!
//! [index]
//! resolution = 10.0
//! session_length = 23400.0
//!
//! [[index.components]]
//! label = "fine"
//! mean_spacing = 240.0
//! mean_width = 96.0
//!
//! [estimator]
//! threshold = 0.25
//! ```

use std::path::{Path, PathBuf};

use rfluct_core::ensembles::{EnsembleSpec, DEFAULT_ELIMINATED_FRACTION};
use rfluct_core::estimator::EstimatorConfig;
use rfluct_core::fluctuation::{AutocorrMode, IntensityScale};
use rfluct_core::index::{IndexModel, StructureLabel, StructureSpec};
use rfluct_core::rng::derive_seed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Nuclear,
    Index,
    Stats,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSection,
    pub nuclear: Option<NuclearSection>,
    pub index: Option<IndexSection>,
    pub stats: Option<StatsSection>,
    #[serde(default)]
    pub estimator: EstimatorSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Resonance spectra at one or more strengths sharing a ladder seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NuclearSection {
    pub n_levels: usize,
    pub mean_spacing: f64,
    /// ⟨Γ⟩/⟨D⟩ values; one spectrum is written per entry.
    pub strengths: Vec<f64>,
    pub eliminated_fraction: f64,
    pub width_dof: u32,
    pub random_signs: bool,
    /// Defaults to `[0, n_levels · mean_spacing]`.
    pub window: Option<[f64; 2]>,
    pub n_points: usize,
    pub wave_number: f64,
    pub include_prefactor: bool,
}

impl Default for NuclearSection {
    fn default() -> Self {
        NuclearSection {
            n_levels: 200,
            mean_spacing: 1.0,
            strengths: vec![0.4, 7.0],
            eliminated_fraction: DEFAULT_ELIMINATED_FRACTION,
            width_dof: 1,
            random_signs: false,
            window: None,
            n_points: 4000,
            wave_number: 1.0,
            include_prefactor: true,
        }
    }
}

impl NuclearSection {
    pub fn window(&self) -> [f64; 2] {
        self.window.unwrap_or([0.0, self.n_levels as f64 * self.mean_spacing])
    }

    /// Ladder recipe for one strength.
    pub fn ensemble(&self, strength: f64, seed: u64) -> rfluct_core::Result<EnsembleSpec> {
        let mut spec = EnsembleSpec::with_strength(
            self.n_levels,
            self.mean_spacing,
            strength,
            self.eliminated_fraction,
            seed,
            self.window(),
        )?;
        spec.width_dof = self.width_dof;
        spec.random_signs = self.random_signs;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSection {
    pub label: StructureLabel,
    pub mean_spacing: f64,
    pub mean_width: f64,
    #[serde(default = "one_u32")]
    pub width_dof: u32,
    #[serde(default = "one_f64")]
    pub amplitude_scale: f64,
    #[serde(default = "half")]
    pub eliminated_fraction: f64,
    /// Sub-seed index; the component seed is derived from the run seed and
    /// this index, which defaults to the component's position in the list.
    pub seed_index: Option<u64>,
}

fn one_u32() -> u32 {
    1
}

fn one_f64() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexSection {
    pub baseline: f64,
    pub resolution: f64,
    pub session_length: f64,
    pub components: Vec<ComponentSection>,
    /// Also write one CSV per component.
    pub write_components: bool,
}

impl Default for IndexSection {
    fn default() -> Self {
        let component = |label, mean_spacing, mean_width| ComponentSection {
            label,
            mean_spacing,
            mean_width,
            width_dof: 1,
            amplitude_scale: 1.0,
            eliminated_fraction: 0.5,
            seed_index: None,
        };
        IndexSection {
            baseline: 10_000.0,
            resolution: 10.0,
            session_length: 23_400.0,
            components: vec![
                component(StructureLabel::Fine, 240.0, 96.0),
                component(StructureLabel::Intermediate, 900.0, 3600.0),
            ],
            write_components: true,
        }
    }
}

impl IndexSection {
    pub fn model(&self, seed: u64) -> IndexModel {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| StructureSpec {
                label: c.label,
                mean_spacing: c.mean_spacing,
                mean_width: c.mean_width,
                width_dof: c.width_dof,
                amplitude_scale: c.amplitude_scale,
                seed: derive_seed(seed, c.seed_index.unwrap_or(i as u64)),
                eliminated_fraction: c.eliminated_fraction,
            })
            .collect();
        IndexModel {
            components,
            baseline: self.baseline,
            resolution: self.resolution,
            session_length: self.session_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub n_samples: usize,
    pub sigma: f64,
    pub intensity_scale: IntensityScale,
    pub histogram_bins: usize,
    pub histogram_max: f64,
    /// Lags for the empirical amplitude and intensity correlations.
    pub max_lag: usize,
    pub lorentz_width: f64,
    pub table_points: usize,
    pub table_max_delta: f64,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection {
            n_samples: 100_000,
            sigma: 1.0,
            intensity_scale: IntensityScale::UnitMean,
            histogram_bins: 40,
            histogram_max: 8.0,
            max_lag: 20,
            lorentz_width: 10.0,
            table_points: 1000,
            table_max_delta: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub max_lag: Option<usize>,
    pub detrend: bool,
    pub pedestal: bool,
    pub residual_ceiling: f64,
    pub min_prominence: f64,
    pub threshold: f64,
    pub autocorr_mode: AutocorrMode,
    /// Opening window for `predict`, in seconds.
    pub train_window: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let e = EstimatorConfig::default();
        EstimatorSection {
            max_lag: e.max_lag,
            detrend: e.detrend,
            pedestal: e.pedestal,
            residual_ceiling: e.residual_ceiling,
            min_prominence: e.min_prominence,
            threshold: e.threshold,
            autocorr_mode: AutocorrMode::default(),
            train_window: 7200.0,
        }
    }
}

impl EstimatorSection {
    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            max_lag: self.max_lag,
            detrend: self.detrend,
            pedestal: self.pedestal,
            residual_ceiling: self.residual_ceiling,
            min_prominence: self.min_prominence,
            threshold: self.threshold,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub train_window: Option<f64>,
    pub threshold: Option<f64>,
    pub autocorr_mode: Option<AutocorrMode>,
    pub no_detrend: bool,
}

impl RunConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config: RunConfig = if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let populated: Vec<Mode> = [
            (self.nuclear.is_some(), Mode::Nuclear),
            (self.index.is_some(), Mode::Index),
            (self.stats.is_some(), Mode::Stats),
        ]
        .into_iter()
        .filter_map(|(present, m)| present.then_some(m))
        .collect();
        if populated.len() > 1 {
            return Err(CliError::Config(format!(
                "only one mode section may be present, found {populated:?}"
            )));
        }
        if let (Some(mode), Some(&section)) = (self.mode, populated.first()) {
            if mode != section {
                return Err(CliError::Config(format!(
                    "mode is {mode:?} but the populated section is {section:?}"
                )));
            }
        }
        let e = &self.estimator;
        if !(e.threshold > 0.0 && e.threshold.is_finite()) {
            return Err(CliError::Config("estimator.threshold must be positive".into()));
        }
        if !(e.min_prominence >= 0.0 && e.min_prominence < 1.0) {
            return Err(CliError::Config("estimator.min_prominence must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.out_dir.is_some() {
            self.output.dir = o.out_dir.clone();
        }
        if o.mode.is_some() {
            self.mode = o.mode;
        }
        if let Some(t) = o.train_window {
            self.estimator.train_window = t;
        }
        if let Some(t) = o.threshold {
            self.estimator.threshold = t;
        }
        if let Some(m) = o.autocorr_mode {
            self.estimator.autocorr_mode = m;
        }
        if o.no_detrend {
            self.estimator.detrend = false;
        }
        self.validate()
    }

    /// The mode to run: explicit, else implied by the populated section.
    pub fn resolved_mode(&self) -> Option<Mode> {
        self.mode.or(if self.nuclear.is_some() {
            Some(Mode::Nuclear)
        } else if self.index.is_some() {
            Some(Mode::Index)
        } else if self.stats.is_some() {
            Some(Mode::Stats)
        } else {
            None
        })
    }

    /// Seed required by the sampling modes.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Config("a seed is required for sampling; set `seed` or pass --seed".into()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Fills the section for `mode` with its preset when absent, and drops
    /// the others, so the hashed config is exactly what ran.
    pub fn resolved_for(&self, mode: Option<Mode>) -> RunConfig {
        let mut c = self.clone();
        c.mode = mode;
        c.nuclear = None;
        c.index = None;
        c.stats = None;
        match mode {
            Some(Mode::Nuclear) => c.nuclear = Some(self.nuclear.clone().unwrap_or_default()),
            Some(Mode::Index) => c.index = Some(self.index.clone().unwrap_or_default()),
            Some(Mode::Stats) => c.stats = Some(self.stats.clone().unwrap_or_default()),
            None => {}
        }
        c
    }

    /// SHA-256 of the canonical JSON form, output location excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
