//! Command-line front end: TOML configs, run and sweep output directories, and analyses of
//! finished runs. The `conflict` binary is a thin argument parser over these functions.

pub mod analyze;
pub mod config;
pub mod manifest;
pub mod run;
pub mod sweep;

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};

pub use analyze::{cmd_analyze, cmd_baseline, AnalyzeOptions, BaselineSource};
pub use config::{load_config, parse_config, LoadError, Loaded, Overrides, RunSettings};
pub use manifest::Manifest;
pub use run::cmd_run;
pub use sweep::cmd_sweep;

/// Shortest decimal that parses back to exactly `v`; no precision is lost. Very small or
/// very large magnitudes use exponent notation (`1e-300`) instead of hundreds of digits.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn create_file(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}
