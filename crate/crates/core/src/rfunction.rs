//! Reduced R-function cross section for two main channels.
//!
//! The eliminated channels enter every level denominator as an imaginary
//! shift, `f_λ(E) = E_λ - E - iΓ_λ^e/2`. With `a_λ = Γ_λn/2`,
//! `b_λ = Γ_λn'/2` the three coherent sums are
//!
//! ```text
//! S_mix   = Σ √a_λ √b_λ / f_λ
//! S_el    = Σ a_λ / f_λ
//! S_inel  = Σ b_λ / f_λ
//! ```
//!
//! and the collision element is `S_mix / [(1 - i S_el)(1 - i S_inel) + S_mix²]`.
//! The cross section is `(4π/k²)·|U|²`.
//!
//! Widths are the observed widths `Γ_λc = a_λc²`; penetration factors and
//! reduced-width amplitudes are not carried separately.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::Level;
use crate::error::{Error, Result};
use crate::series::{Grid, SpectrumSeries};

/// `|D|` below this is treated as singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-30;

/// A grid point closer than this fraction of the grid width to a level with
/// zero eliminated width is a pole.
pub const POLE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionConfig {
    #[serde(default = "unit")]
    pub wave_number: f64,
    #[serde(default = "yes")]
    pub include_prefactor: bool,
    pub grid: Grid,
}

fn unit() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl ReactionConfig {
    pub fn new(grid: Grid) -> Self {
        ReactionConfig {
            wave_number: 1.0,
            include_prefactor: true,
            grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wave_number > 0.0 && self.wave_number.is_finite()) {
            return Err(Error::param("wave_number", "must be positive"));
        }
        self.grid.validate()
    }

    fn prefactor(&self) -> f64 {
        if self.include_prefactor {
            4.0 * std::f64::consts::PI / (self.wave_number * self.wave_number)
        } else {
            1.0
        }
    }
}

/// The three coherent level sums at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmplitudeTriple {
    pub mix: Complex64,
    pub elastic: Complex64,
    pub inelastic: Complex64,
}

impl std::ops::Add for AmplitudeTriple {
    type Output = AmplitudeTriple;

    fn add(self, rhs: Self) -> Self {
        AmplitudeTriple {
            mix: self.mix + rhs.mix,
            elastic: self.elastic + rhs.elastic,
            inelastic: self.inelastic + rhs.inelastic,
        }
    }
}

/// `Γ_λ - Γ_λn - Γ_λn'`.
pub fn eliminated_width(level: &Level) -> Result<f64> {
    let e = level.width_total - level.width_elastic - level.width_inelastic;
    // absorb rounding from the three-term sum
    let slack = 4.0 * f64::EPSILON * level.width_total.abs();
    if e < -slack {
        return Err(Error::ModelConsistency(format!(
            "total width {} is below elastic + inelastic = {}",
            level.width_total,
            level.width_elastic + level.width_inelastic
        )));
    }
    Ok(e.max(0.0))
}

/// Per-level factors in the sums, precomputed once per ladder.
#[derive(Debug, Clone, Copy)]
struct LevelTerm {
    position: f64,
    half_eliminated: f64,
    half_elastic: f64,
    half_inelastic: f64,
    mix: f64,
}

impl LevelTerm {
    fn new(level: &Level) -> Self {
        let a = 0.5 * level.width_elastic;
        let b = 0.5 * level.width_inelastic;
        LevelTerm {
            position: level.position,
            half_eliminated: 0.5 * level.width_eliminated,
            half_elastic: a,
            half_inelastic: b,
            mix: level.inelastic_sign * a.sqrt() * b.sqrt(),
        }
    }
}

fn sums(terms: &[LevelTerm], e: f64, pole_tol: f64) -> Result<AmplitudeTriple> {
    let mut t = AmplitudeTriple::default();
    for term in terms {
        let re = term.position - e;
        let im = -term.half_eliminated;
        if im == 0.0 && re.abs() <= pole_tol {
            return Err(Error::Pole { abscissa: e });
        }
        // 1/f = conj(f)/|f|²
        let norm = re * re + im * im;
        let inv = Complex64::new(re / norm, -im / norm);
        t.mix += inv * term.mix;
        t.elastic += inv * term.half_elastic;
        t.inelastic += inv * term.half_inelastic;
    }
    Ok(t)
}

fn terms_of(levels: &[Level]) -> Vec<LevelTerm> {
    levels.iter().map(LevelTerm::new).collect()
}

/// The three coherent sums at abscissa `e`, accumulated in list order.
pub fn amplitude_sums(levels: &[Level], e: f64) -> Result<AmplitudeTriple> {
    if levels.is_empty() {
        return Err(Error::Degenerate("no levels".into()));
    }
    sums(&terms_of(levels), e, 0.0)
}

/// `S_mix / [(1 - i S_el)(1 - i S_inel) + S_mix²]`.
pub fn collision_element(triple: &AmplitudeTriple) -> Result<Complex64> {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let d = (one - i * triple.elastic) * (one - i * triple.inelastic) + triple.mix * triple.mix;
    let magnitude = d.norm();
    if !(magnitude >= SINGULAR_DENOMINATOR) {
        return Err(Error::SingularDenominator { magnitude });
    }
    Ok(triple.mix / d)
}

/// σ_nn' at abscissa `e`.
pub fn inelastic_cross_section(levels: &[Level], config: &ReactionConfig, e: f64) -> Result<f64> {
    config.validate()?;
    let u = collision_element(&amplitude_sums(levels, e)?)?;
    Ok(config.prefactor() * u.norm_sqr())
}

/// Levels in canonical order: ascending position, ties by widths.
pub fn canonical_order(levels: &[Level]) -> Vec<Level> {
    let mut sorted = levels.to_vec();
    sorted.sort_by(|a, b| {
        a.position
            .total_cmp(&b.position)
            .then(a.width_total.total_cmp(&b.width_total))
            .then(a.width_elastic.total_cmp(&b.width_elastic))
            .then(a.inelastic_sign.total_cmp(&b.inelastic_sign))
    });
    sorted
}

fn point_value(terms: &[LevelTerm], e: f64, pole_tol: f64, prefactor: f64) -> Result<f64> {
    sums(terms, e, pole_tol)
        .and_then(|t| collision_element(&t))
        .map(|u| prefactor * u.norm_sqr())
        .map_err(|err| match err {
            Error::Pole { .. } => err,
            other => Error::At {
                abscissa: e,
                source: Box::new(other),
            },
        })
}

/// σ on every point of `config.grid`, evaluated in parallel.
///
/// Each point sums the levels in canonical order, so the output does not
/// depend on the input order or on the number of worker threads.
pub fn evaluate_spectrum(levels: &[Level], config: &ReactionConfig) -> Result<SpectrumSeries> {
    evaluate_spectrum_with(levels, config, true)
}

/// As [`evaluate_spectrum`], optionally on the calling thread only.
pub fn evaluate_spectrum_with(levels: &[Level], config: &ReactionConfig, parallel: bool) -> Result<SpectrumSeries> {
    config.validate()?;
    let terms = terms_of(&canonical_order(levels));
    let grid = config.grid;
    let pole_tol = POLE_TOLERANCE * grid.width();
    let prefactor = config.prefactor();
    let eval = |i: usize| point_value(&terms, grid.point(i), pole_tol, prefactor);
    let values: Result<Vec<f64>> = if parallel {
        (0..grid.n_points).into_par_iter().with_min_len(64).map(eval).collect()
    } else {
        (0..grid.n_points).map(eval).collect()
    };
    Ok(SpectrumSeries::on_grid(&grid, values?))
}

/// Indices of grid-resolved local maxima: `v[i-1] < v[i] >= v[i+1]`.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect()
}
