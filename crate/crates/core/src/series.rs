use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform abscissa grid `[lo, hi]` sampled at `n_points` points, both
/// ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        let grid = Grid { lo, hi, n_points };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid from `lo` to `hi` with spacing `step`; `hi - lo` must be a whole
    /// number of steps.
    pub fn with_step(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::param("step", "must be positive"));
        }
        let intervals = (hi - lo) / step;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::param(
                "step",
                format!("span {} is not a multiple of {step}", hi - lo),
            ));
        }
        Grid::new(lo, hi, rounded as usize + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::param("n_points", "need at least 2 grid points"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::param("grid", format!("need lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n_points - 1) as f64
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }
}

/// Real values on a uniform abscissa grid (energy or time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl SpectrumSeries {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Self {
        SpectrumSeries {
            start,
            step,
            values,
        }
    }

    pub fn on_grid(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.n_points, values.len());
        SpectrumSeries::new(grid.lo, grid.step(), values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.abscissa(self.len().saturating_sub(1))
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Samples `[from, to)` by index, keeping abscissae.
    pub fn slice(&self, from: usize, to: usize) -> SpectrumSeries {
        SpectrumSeries::new(self.abscissa(from), self.step, self.values[from..to].to_vec())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpectrumSeries {
        SpectrumSeries::new(self.start, self.step, self.values.iter().map(|&v| f(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_with_step_counts_both_ends() {
        let g = Grid::with_step(0.0, 23_400.0, 10.0).unwrap();
        assert_eq!(g.n_points, 2341);
        assert_eq!(g.point(2340), 23_400.0);
        assert!(Grid::with_step(0.0, 25.0, 10.0).is_err());
    }

    #[test]
    fn grid_rejects_degenerate() {
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 1.0, 5).is_err());
    }
}
