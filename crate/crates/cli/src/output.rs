//! Artifact writers. Numbers use Rust's shortest round-trip formatting, so
//! re-reading a file reproduces every value bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

pub const TOOL: &str = "rfluct";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance written at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: String,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Stamp {
    pub fn new(kind: impl Into<String>, config_hash: &str, seed: Option<u64>) -> Self {
        Stamp {
            tool: TOOL,
            version: VERSION,
            kind: kind.into(),
            config_hash: config_hash.to_string(),
            seed,
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Renders a CSV with a `# key=value` preamble.
pub fn render_csv(stamp: &Stamp, extra: &[(&str, String)], header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    let seed = stamp.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    let _ = writeln!(out, "# tool={} {}", stamp.tool, stamp.version);
    let _ = writeln!(out, "# kind={}", stamp.kind);
    let _ = writeln!(out, "# config_hash={}", stamp.config_hash);
    let _ = writeln!(out, "# seed={seed}");
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(
    path: PathBuf,
    stamp: &Stamp,
    extra: &[(&str, String)],
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<PathBuf> {
    write_file(&path, &render_csv(stamp, extra, header, rows))?;
    Ok(path)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    #[serde(flatten)]
    stamp: &'a Stamp,
    #[serde(flatten)]
    body: &'a T,
}

pub fn render_json<T: Serialize>(stamp: &Stamp, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Report { stamp, body }).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: PathBuf, stamp: &Stamp, body: &T) -> Result<PathBuf> {
    write_file(&path, &render_json(stamp, body))?;
    Ok(path)
}
