//! Seeded resonance ladders.
//!
//! Spacings follow the GOE Wigner surmise
//!
//! ```text
//! p(s) = (π s / 2 D²) exp(-π s² / 4 D²)
//! ```
//!
//! with mean `D`, and partial widths are scaled χ² variates with ν degrees
//! of freedom (ν = 1 is Porter-Thomas). Spacings, elastic widths,
//! inelastic widths and amplitude signs each come from their own stream of
//! the spec seed, so rescaling the width means leaves the positions
//! bit-identical.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Levels are laid out over the analysis window widened by this many mean
/// total widths on each side.
pub const EDGE_PADDING_WIDTHS: f64 = 10.0;

/// Default share of ⟨Γ⟩ carried by the eliminated channels in nuclear runs.
/// With two main channels the collision element saturates near unitarity
/// once levels overlap, which caps the correlation width those channels can
/// carry; keeping most of the width eliminated lets Γ̂ track ⟨Γ⟩.
pub const DEFAULT_ELIMINATED_FRACTION: f64 = 0.8;

/// One resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub position: f64,
    pub width_elastic: f64,
    pub width_inelastic: f64,
    pub width_eliminated: f64,
    pub width_total: f64,
    /// Sign carried by the inelastic reduced-width amplitude, ±1.
    #[serde(default = "positive")]
    pub inelastic_sign: f64,
}

fn positive() -> f64 {
    1.0
}

impl Level {
    pub fn new(position: f64, width_elastic: f64, width_inelastic: f64, width_eliminated: f64) -> Result<Self> {
        for (name, w) in [
            ("width_elastic", width_elastic),
            ("width_inelastic", width_inelastic),
            ("width_eliminated", width_eliminated),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {w}")));
            }
        }
        if !position.is_finite() {
            return Err(Error::param("position", "must be finite"));
        }
        Ok(Level {
            position,
            width_elastic,
            width_inelastic,
            width_eliminated,
            width_total: width_elastic + width_inelastic + width_eliminated,
            inelastic_sign: 1.0,
        })
    }

    /// Builds a level from its total width, deriving the eliminated part.
    pub fn from_total(position: f64, width_elastic: f64, width_inelastic: f64, width_total: f64) -> Result<Self> {
        let mut level = Level::new(position, width_elastic, width_inelastic, 0.0)?;
        level.width_total = width_total;
        level.width_eliminated = crate::rfunction::eliminated_width(&level)?;
        Ok(level)
    }

    pub fn with_sign(mut self, sign: f64) -> Self {
        self.inelastic_sign = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }
}

/// Recipe for a level ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_levels: usize,
    pub mean_spacing: f64,
    /// Mean of each of the two main channel widths.
    pub mean_width_main: f64,
    /// Constant eliminated width given to every level.
    pub eliminated_width: f64,
    #[serde(default = "default_dof")]
    pub width_dof: u32,
    pub seed: u64,
    pub window: [f64; 2],
    /// Draw a random sign for each inelastic amplitude.
    #[serde(default)]
    pub random_signs: bool,
}

fn default_dof() -> u32 {
    1
}

impl EnsembleSpec {
    /// A spec for strength function `ratio` with `eliminated_fraction` of the
    /// mean total width assigned to the eliminated channels and the rest
    /// split evenly between the two main channels.
    pub fn with_strength(
        n_levels: usize,
        mean_spacing: f64,
        ratio: f64,
        eliminated_fraction: f64,
        seed: u64,
        window: [f64; 2],
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&eliminated_fraction) {
            return Err(Error::param("eliminated_fraction", "must lie in [0, 1)"));
        }
        let total = ratio * mean_spacing;
        let spec = EnsembleSpec {
            n_levels,
            mean_spacing,
            mean_width_main: 0.5 * total * (1.0 - eliminated_fraction),
            eliminated_width: total * eliminated_fraction,
            width_dof: 1,
            seed,
            window,
            random_signs: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 1 {
            return Err(Error::param("n_levels", "need at least one level"));
        }
        if !(self.mean_spacing > 0.0 && self.mean_spacing.is_finite()) {
            return Err(Error::param("mean_spacing", "must be positive"));
        }
        if !(self.mean_width_main > 0.0 && self.mean_width_main.is_finite()) {
            return Err(Error::param("mean_width_main", "must be positive"));
        }
        if !(self.eliminated_width >= 0.0 && self.eliminated_width.is_finite()) {
            return Err(Error::param("eliminated_width", "must be >= 0"));
        }
        if self.width_dof == 0 {
            return Err(Error::param("width_dof", "need at least one degree of freedom"));
        }
        if !(self.window[0] < self.window[1]) {
            return Err(Error::param("window", "need lo < hi"));
        }
        Ok(())
    }

    /// Mean total width implied by the spec.
    pub fn mean_total_width(&self) -> f64 {
        2.0 * self.mean_width_main + self.eliminated_width
    }

    /// ⟨Γ⟩/⟨D⟩ implied by the spec.
    pub fn strength(&self) -> f64 {
        self.mean_total_width() / self.mean_spacing
    }

    /// Number of levels needed to cover the window plus edge padding.
    pub fn padded_level_count(&self) -> usize {
        padded_level_count(self.window[1] - self.window[0], self.mean_spacing, self.mean_total_width())
    }
}

/// Levels needed so a ladder of mean spacing `mean_spacing` spans
/// `window_width` plus `EDGE_PADDING_WIDTHS` mean widths on each side.
pub fn padded_level_count(window_width: f64, mean_spacing: f64, mean_total_width: f64) -> usize {
    let span = window_width + 2.0 * EDGE_PADDING_WIDTHS * mean_total_width;
    (span / mean_spacing).ceil() as usize + 1
}

/// Draws `n` spacings from the Wigner surmise with mean `mean_spacing`.
pub fn sample_wigner_spacings<R: Rng + ?Sized>(n: usize, mean_spacing: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(mean_spacing > 0.0 && mean_spacing.is_finite()) {
        return Err(Error::param("mean_spacing", format!("must be positive, got {mean_spacing}")));
    }
    // Inverse CDF: F(s) = 1 - exp(-π s² / 4 D²).
    let scale = mean_spacing * 2.0 / std::f64::consts::PI.sqrt();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u: f64 = rng.random();
        let s = scale * (-(1.0 - u).ln()).sqrt();
        if s > 0.0 {
            out.push(s);
        }
    }
    Ok(out)
}

/// `(mean / ν) · χ²_ν` sampler.
#[derive(Debug, Clone, Copy)]
pub struct ScaledChiSquared {
    scale: f64,
    inner: ChiSquared<f64>,
}

impl ScaledChiSquared {
    pub fn new(mean: f64, dof: u32) -> Result<Self> {
        if dof == 0 {
            return Err(Error::param("dof", "need at least one degree of freedom"));
        }
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::param("mean", format!("must be positive, got {mean}")));
        }
        let inner = ChiSquared::new(dof as f64).map_err(|e| Error::param("dof", e.to_string()))?;
        Ok(ScaledChiSquared {
            scale: mean / dof as f64,
            inner,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.scale * self.inner.sample(rng)
    }
}

/// One scaled χ² draw with the given mean and degrees of freedom.
pub fn sample_scaled_chi2<R: Rng + ?Sized>(mean: f64, dof: u32, rng: &mut R) -> Result<f64> {
    Ok(ScaledChiSquared::new(mean, dof)?.sample(rng))
}

/// Builds the ladder described by `spec`: cumulative Wigner spacings
/// centred on the window midpoint, χ² main widths, constant eliminated
/// width.
pub fn build_level_ladder(spec: &EnsembleSpec) -> Result<Vec<Level>> {
    spec.validate()?;
    let n = spec.n_levels;

    let spacings = sample_wigner_spacings(n - 1, spec.mean_spacing, &mut stream_rng(spec.seed, Stream::Spacings))?;
    let mut positions = Vec::with_capacity(n);
    let mut acc = 0.0;
    positions.push(acc);
    for s in &spacings {
        acc += s;
        positions.push(acc);
    }
    let mid = 0.5 * (spec.window[0] + spec.window[1]);
    let shift = mid - 0.5 * acc;

    let width_dist = ScaledChiSquared::new(spec.mean_width_main, spec.width_dof)?;
    let mut elastic_rng = stream_rng(spec.seed, Stream::ElasticWidths);
    let mut inelastic_rng = stream_rng(spec.seed, Stream::InelasticWidths);
    let mut sign_rng = stream_rng(spec.seed, Stream::AmplitudeSigns);

    positions
        .into_iter()
        .map(|p| {
            let el = width_dist.sample(&mut elastic_rng);
            let inel = width_dist.sample(&mut inelastic_rng);
            let level = Level::new(p + shift, el, inel, spec.eliminated_width)?;
            let sign = if spec.random_signs && sign_rng.random::<bool>() { -1.0 } else { 1.0 };
            Ok(level.with_sign(sign))
        })
        .collect()
}

/// Empirical mean spacing, mean total width and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderStats {
    pub mean_spacing: f64,
    pub mean_total_width: f64,
    pub strength: f64,
}

/// Measures a ladder; needs at least two levels for a spacing.
pub fn ladder_stats(levels: &[Level]) -> Option<LadderStats> {
    if levels.len() < 2 {
        return None;
    }
    let mut positions: Vec<f64> = levels.iter().map(|l| l.position).collect();
    positions.sort_by(f64::total_cmp);
    let mean_spacing = (positions[positions.len() - 1] - positions[0]) / (positions.len() - 1) as f64;
    let mean_total_width = levels.iter().map(|l| l.width_total).sum::<f64>() / levels.len() as f64;
    Some(LadderStats {
        mean_spacing,
        mean_total_width,
        strength: mean_total_width / mean_spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    fn ks_exp1(xs: &mut [f64]) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 1.0 - (-x).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn wigner_empty_and_errors() {
        let mut rng = stream_rng(1, Stream::Auxiliary);
        assert!(sample_wigner_spacings(0, 3.0, &mut rng).unwrap().is_empty());
        assert!(sample_wigner_spacings(5, 0.0, &mut rng).is_err());
        assert!(sample_wigner_spacings(5, -1.0, &mut rng).is_err());
    }

    #[test]
    fn wigner_moments() {
        let mut rng = stream_rng(11, Stream::Spacings);
        let s = sample_wigner_spacings(1_000_000, 1.0, &mut rng).unwrap();
        assert!(s.iter().all(|&x| x > 0.0));
        let (m, v) = mean_var(&s);
        assert!((0.997..=1.003).contains(&m), "mean {m}");
        let expected = 4.0 / std::f64::consts::PI - 1.0;
        assert!((v - expected).abs() / expected < 0.01, "var {v} vs {expected}");
    }

    #[test]
    fn chi2_concentrates_at_large_dof() {
        let mut rng = stream_rng(2, Stream::Auxiliary);
        for _ in 0..20 {
            let w = sample_scaled_chi2(2.0, 1_000_000, &mut rng).unwrap();
            assert!((1.98..=2.02).contains(&w), "{w}");
        }
    }

    #[test]
    fn porter_thomas_variance() {
        let dist = ScaledChiSquared::new(1.0, 1).unwrap();
        let mut rng = stream_rng(3, Stream::Auxiliary);
        let xs: Vec<f64> = (0..1_000_000).map(|_| dist.sample(&mut rng)).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 1.0).abs() < 0.01, "mean {m}");
        assert!((v - 2.0).abs() / 2.0 < 0.02, "var {v}");
    }

    #[test]
    fn two_dof_is_exponential() {
        let dist = ScaledChiSquared::new(1.0, 2).unwrap();
        let mut rng = stream_rng(4, Stream::Auxiliary);
        let mut xs: Vec<f64> = (0..1_000_000).map(|_| dist.sample(&mut rng)).collect();
        let d = ks_exp1(&mut xs);
        assert!(d < 0.002, "KS {d}");
    }

    #[test]
    fn chi2_rejects_zero_dof() {
        let mut rng = stream_rng(4, Stream::Auxiliary);
        assert!(sample_scaled_chi2(1.0, 0, &mut rng).is_err());
        assert!(sample_scaled_chi2(0.0, 1, &mut rng).is_err());
    }

    fn spec(n: usize, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            n_levels: n,
            mean_spacing: 1.0,
            mean_width_main: 0.1,
            eliminated_width: 0.0,
            width_dof: 1,
            seed,
            window: [-5.0, 5.0],
            random_signs: false,
        }
    }

    #[test]
    fn single_level_sum_identity() {
        let levels = build_level_ladder(&spec(1, 9)).unwrap();
        assert_eq!(levels.len(), 1);
        let l = levels[0];
        assert_eq!(l.width_total, l.width_elastic + l.width_inelastic);
        assert_eq!(l.position, 0.0);
    }

    #[test]
    fn ladder_is_deterministic() {
        assert_eq!(build_level_ladder(&spec(50, 42)).unwrap(), build_level_ladder(&spec(50, 42)).unwrap());
        assert_ne!(build_level_ladder(&spec(50, 42)).unwrap(), build_level_ladder(&spec(50, 43)).unwrap());
    }

    #[test]
    fn thousand_level_spacing() {
        let levels = build_level_ladder(&spec(1000, 5)).unwrap();
        let st = ladder_stats(&levels).unwrap();
        assert!((st.mean_spacing - 1.0).abs() < 0.05, "{st:?}");
        assert!(levels.windows(2).all(|w| w[1].position > w[0].position));
        let centre = 0.5 * (levels[0].position + levels[999].position);
        assert!(centre.abs() < 1e-9);
    }

    #[test]
    fn strength_converges() {
        let mut s = EnsembleSpec::with_strength(10_000, 2.0, 3.0, 0.5, 17, [0.0, 100.0]).unwrap();
        s.width_dof = 1;
        let st = ladder_stats(&build_level_ladder(&s).unwrap()).unwrap();
        assert!((st.strength - 3.0).abs() / 3.0 < 0.05, "{st:?}");
    }

    #[test]
    fn width_means_do_not_move_positions() {
        let a = EnsembleSpec::with_strength(200, 1.0, 0.4, 0.5, 8, [0.0, 200.0]).unwrap();
        let b = EnsembleSpec::with_strength(200, 1.0, 7.0, 0.5, 8, [0.0, 200.0]).unwrap();
        let la = build_level_ladder(&a).unwrap();
        let lb = build_level_ladder(&b).unwrap();
        for (x, y) in la.iter().zip(&lb) {
            assert_eq!(x.position.to_bits(), y.position.to_bits());
            // same χ² draws, rescaled
            assert!((y.width_elastic / x.width_elastic - 17.5).abs() < 1e-9);
        }
    }

    #[test]
    fn random_signs_are_mixed() {
        let mut s = spec(400, 1);
        s.random_signs = true;
        let levels = build_level_ladder(&s).unwrap();
        let neg = levels.iter().filter(|l| l.inelastic_sign < 0.0).count();
        assert!(neg > 150 && neg < 250, "{neg}");
        s.random_signs = false;
        assert!(build_level_ladder(&s).unwrap().iter().all(|l| l.inelastic_sign == 1.0));
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(0, 1);
        assert!(s.validate().is_err());
        s = spec(3, 1);
        s.window = [1.0, 1.0];
        assert!(s.validate().is_err());
        s = spec(3, 1);
        s.eliminated_width = -0.1;
        assert!(s.validate().is_err());
        s = spec(3, 1);
        s.width_dof = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn padding_covers_window() {
        let s = EnsembleSpec::with_strength(1, 1.0, 2.0, 0.5, 1, [0.0, 100.0]).unwrap();
        assert_eq!(s.padded_level_count(), 141);
    }
}
