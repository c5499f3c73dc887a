//! Synthetic intraday index built from R-function components.
//!
//! Each component (fine, intermediate, gross) is an R-function spectrum on
//! the time axis, normalized to unit mean and scaled. Components are summed
//! with a constant baseline; their level ladders are drawn from distinct
//! seeds and are mutually independent.

use serde::{Deserialize, Serialize};

use crate::ensembles::{build_level_ladder, ladder_stats, padded_level_count, EnsembleSpec, LadderStats};
use crate::error::{Error, Result};
use crate::rfunction::{evaluate_spectrum, ReactionConfig};
use crate::series::{Grid, SpectrumSeries};

/// Finest cadence for which strength-function estimates are considered reliable.
pub const VALIDATED_RESOLUTION_SECONDS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureLabel {
    Fine,
    Intermediate,
    Gross,
}

impl std::fmt::Display for StructureLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StructureLabel::Fine => "fine",
            StructureLabel::Intermediate => "intermediate",
            StructureLabel::Gross => "gross",
        })
    }
}

/// One index component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub label: StructureLabel,
    /// ⟨D⟩ in seconds.
    pub mean_spacing: f64,
    /// ⟨Γ⟩ in seconds.
    pub mean_width: f64,
    #[serde(default = "one")]
    pub width_dof: u32,
    pub amplitude_scale: f64,
    pub seed: u64,
    /// Share of ⟨Γ⟩ given to the eliminated channels.
    #[serde(default = "half")]
    pub eliminated_fraction: f64,
}

fn one() -> u32 {
    1
}

fn half() -> f64 {
    0.5
}

impl StructureSpec {
    pub fn new(label: StructureLabel, mean_spacing: f64, mean_width: f64, amplitude_scale: f64, seed: u64) -> Self {
        StructureSpec {
            label,
            mean_spacing,
            mean_width,
            width_dof: 1,
            amplitude_scale,
            seed,
            eliminated_fraction: 0.5,
        }
    }

    pub fn strength(&self) -> f64 {
        self.mean_width / self.mean_spacing
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_spacing > 0.0 && self.mean_spacing.is_finite()) {
            return Err(Error::param("mean_spacing", "must be positive"));
        }
        if !(self.mean_width > 0.0 && self.mean_width.is_finite()) {
            return Err(Error::param("mean_width", "must be positive"));
        }
        if !(self.amplitude_scale >= 0.0 && self.amplitude_scale.is_finite()) {
            return Err(Error::param("amplitude_scale", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.eliminated_fraction) {
            return Err(Error::param("eliminated_fraction", "must lie in [0, 1)"));
        }
        if self.width_dof == 0 {
            return Err(Error::param("width_dof", "need at least one degree of freedom"));
        }
        Ok(())
    }

    /// Ladder recipe covering `grid`. Gross structure uses one to three
    /// broad levels across the window; the other scales are padded.
    pub fn ensemble(&self, grid: &Grid) -> Result<EnsembleSpec> {
        self.validate()?;
        let n_levels = match self.label {
            StructureLabel::Gross => ((grid.width() / self.mean_spacing).ceil() as usize).clamp(1, 3),
            _ => padded_level_count(grid.width(), self.mean_spacing, self.mean_width),
        };
        let spec = EnsembleSpec {
            n_levels,
            mean_spacing: self.mean_spacing,
            mean_width_main: 0.5 * self.mean_width * (1.0 - self.eliminated_fraction),
            eliminated_width: self.mean_width * self.eliminated_fraction,
            width_dof: self.width_dof,
            seed: self.seed,
            window: [grid.lo, grid.hi],
            random_signs: false,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A synthesized component with its ladder diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub label: StructureLabel,
    pub series: SpectrumSeries,
    pub ladder: Option<LadderStats>,
    pub n_levels: usize,
    pub warnings: Vec<String>,
}

/// Renders one component on `grid`.
pub fn synthesize_component(spec: &StructureSpec, grid: &Grid) -> Result<Component> {
    spec.validate()?;
    grid.validate()?;
    let samples_per_width = spec.mean_width / grid.step();
    if samples_per_width < 1.0 {
        return Err(Error::Resolution { samples_per_width });
    }
    let mut warnings = Vec::new();
    if samples_per_width < 2.0 {
        warnings.push(format!(
            "{} component: {samples_per_width:.2} samples per mean width; at least 2 recommended",
            spec.label
        ));
    }
    let ensemble = spec.ensemble(grid)?;
    let levels = build_level_ladder(&ensemble)?;
    let config = ReactionConfig {
        wave_number: 1.0,
        include_prefactor: false,
        grid: *grid,
    };
    let raw = evaluate_spectrum(&levels, &config)?;
    let mean = raw.mean();
    let series = if spec.amplitude_scale == 0.0 || mean == 0.0 {
        raw.map(|_| 0.0)
    } else {
        let factor = spec.amplitude_scale / mean;
        raw.map(|v| v * factor)
    };
    Ok(Component {
        label: spec.label,
        series,
        ladder: ladder_stats(&levels),
        n_levels: levels.len(),
        warnings,
    })
}

/// Recipe for a whole session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexModel {
    pub components: Vec<StructureSpec>,
    pub baseline: f64,
    /// Seconds per sample.
    pub resolution: f64,
    /// Session length in seconds.
    pub session_length: f64,
}

impl IndexModel {
    pub fn grid(&self) -> Result<Grid> {
        if !(self.resolution > 0.0) {
            return Err(Error::param("resolution", "must be positive"));
        }
        Grid::with_step(0.0, self.session_length, self.resolution)
    }
}

/// Composed session and its parts.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    pub series: SpectrumSeries,
    pub components: Vec<Component>,
    pub warnings: Vec<String>,
}

/// Baseline plus the pointwise sum of every component, in list order.
pub fn compose_index(model: &IndexModel) -> Result<IndexSeries> {
    let grid = model.grid()?;
    let mut warnings = Vec::new();
    if model.resolution < VALIDATED_RESOLUTION_SECONDS {
        warnings.push(format!(
            "resolution {} s is finer than the validated {VALIDATED_RESOLUTION_SECONDS} s regime",
            model.resolution
        ));
    }
    for (i, a) in model.components.iter().enumerate() {
        if model.components[..i].iter().any(|b| b.seed == a.seed) {
            warnings.push(format!(
                "component {i} ({}) reuses seed {}; its states are correlated with an earlier component",
                a.label, a.seed
            ));
        }
    }

    let components = model
        .components
        .iter()
        .map(|spec| synthesize_component(spec, &grid))
        .collect::<Result<Vec<_>>>()?;

    let mut values = vec![0.0; grid.n_points];
    for c in &components {
        for (v, x) in values.iter_mut().zip(&c.series.values) {
            *v += x;
        }
        warnings.extend(c.warnings.iter().cloned());
    }
    // baseline last, so shifting it is exact
    for v in &mut values {
        *v += model.baseline;
    }
    Ok(IndexSeries {
        series: SpectrumSeries::on_grid(&grid, values),
        components,
        warnings,
    })
}
