//! Resonance-fluctuation toolkit built on the reduced R-function.
//!
//! Generates seeded level ladders, evaluates two-channel R-function cross
//! sections over a grid, composes multi-scale synthetic index series, and
//! estimates the strength function ⟨Γ⟩/⟨D⟩ from observed series.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod estimator;
pub mod fit;
pub mod fluctuation;
pub mod index;
pub mod rfunction;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
