//! Configuration, CSV plumbing and subcommand drivers behind the `rfluct`
//! binary. Everything here is deterministic given a config and a seed:
//! outputs carry the config hash and seed but no wall-clock data, so two
//! runs can be compared byte for byte.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

pub use error::{CliError, ExitCode};
