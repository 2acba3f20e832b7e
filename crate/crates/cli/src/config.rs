//! TOML configuration files: run configs, sweep specs and the `[config]` table of a manifest.
//!
//! A run config holds the [`SimConfig`] keys at the top level plus an optional `[classifier]`
//! table. A sweep config is recognised by its `grid` table and nests the run template under
//! `[base]`. Unknown keys are rejected everywhere.

use std::path::Path;

use conflict_core::analysis::ClassifierThresholds;
use conflict_core::sweep::{GridKind, SweepSpec, DEFAULT_SEEDS_PER_POINT, DEFAULT_STEP};
use conflict_core::{ConfigError, GamePayoffs, SimConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config is not valid TOML: {0}")]
    Syntax(String),
    #[error("config schema violation: {0}")]
    Schema(String),
    #[error("config rejected: {0}")]
    Invalid(#[from] ConfigError),
}

/// A single simulation and the thresholds used to label it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub sim: SimConfig,
    pub classifier: ClassifierThresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Loaded {
    Run(RunSettings),
    Sweep(SweepSpec),
}

/// Command-line values that replace config values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub snapshot_every: Option<u64>,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}
fn default_seeds() -> u64 {
    DEFAULT_SEEDS_PER_POINT
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    grid: GridKind,
    #[serde(default = "default_step")]
    step: f64,
    #[serde(default = "default_seeds")]
    seeds_per_point: u64,
    base: Table,
    #[serde(default)]
    classifier: ClassifierThresholds,
}

#[derive(Serialize)]
struct SweepOut<'a> {
    grid: &'a GridKind,
    step: f64,
    seeds_per_point: u64,
    base: &'a SimConfig,
    classifier: &'a ClassifierThresholds,
}

fn schema<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> LoadError + '_ {
    move |e| {
        let msg = e.to_string();
        let msg = msg.trim();
        if context.is_empty() {
            LoadError::Schema(msg.to_string())
        } else {
            LoadError::Schema(format!("in [{context}]: {msg}"))
        }
    }
}

/// TOML integers are signed, so seeds written to a file must stay below 2^63.
fn check_seed(seed: u64, field: &str) -> Result<(), ConfigError> {
    if seed > i64::MAX as u64 {
        return Err(ConfigError::Invariant {
            field: field.to_string(),
            rule: "seed must be at most 9223372036854775807 to fit a TOML integer".to_string(),
            value: seed.to_string(),
        });
    }
    Ok(())
}

fn sim_from_table(table: Table, context: &str) -> Result<SimConfig, LoadError> {
    table.try_into::<SimConfig>().map_err(schema(context))
}

fn parse_run(mut table: Table) -> Result<RunSettings, LoadError> {
    let classifier = match table.remove("classifier") {
        Some(v) => v.try_into::<ClassifierThresholds>().map_err(schema("classifier"))?,
        None => ClassifierThresholds::default(),
    };
    let sim = sim_from_table(table, "")?;
    Ok(RunSettings { sim, classifier })
}

fn parse_sweep(table: Table) -> Result<SweepSpec, LoadError> {
    let file: SweepFile = table.try_into().map_err(schema(""))?;
    let mut base = file.base;
    // Payoffs are set per grid point; the template only needs a placeholder.
    let placeholder = !base.contains_key("payoffs");
    if placeholder {
        let g = Table::try_from(GamePayoffs::symmetric(0.5, 0.5)?).expect("payoffs serialize");
        base.insert("payoffs".into(), Value::Table(g));
    }
    let mut spec = SweepSpec {
        grid: file.grid,
        step: file.step,
        seeds_per_point: file.seeds_per_point,
        base: sim_from_table(base, "base")?,
        thresholds: file.classifier,
    };
    if placeholder {
        spec.base.payoffs = spec.points()?[0];
    }
    Ok(spec)
}

impl Loaded {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::Run(_) => "run",
            Loaded::Sweep(_) => "sweep",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Loaded::Run(r) => {
                check_seed(r.sim.seed, "seed")?;
                r.sim.validate()?;
                r.classifier.validate()
            }
            Loaded::Sweep(s) => {
                check_seed(s.base.seed, "base.seed")?;
                s.validate()?;
                s.points().map(|_| ())
            }
        }
    }

    pub fn apply(&mut self, o: Overrides) -> Result<(), ConfigError> {
        let sim = match self {
            Loaded::Run(r) => &mut r.sim,
            Loaded::Sweep(s) => &mut s.base,
        };
        if let Some(seed) = o.seed {
            sim.seed = seed;
        }
        if let Some(every) = o.snapshot_every {
            sim.snapshot_every = every;
        }
        self.validate()
    }

    /// The fully resolved config in file form.
    pub fn to_table(&self) -> Table {
        let table = match self {
            Loaded::Run(r) => {
                let mut t = Table::try_from(&r.sim).expect("validated config serializes");
                let c = Table::try_from(r.classifier).expect("thresholds serialize");
                t.insert("classifier".into(), Value::Table(c));
                Ok(t)
            }
            Loaded::Sweep(s) => Table::try_from(SweepOut {
                grid: &s.grid,
                step: s.step,
                seeds_per_point: s.seeds_per_point,
                base: &s.base,
                classifier: &s.thresholds,
            }),
        };
        table.expect("validated config serializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_table()).expect("table serializes")
    }

    /// SHA-256 of [`Loaded::to_toml`], hex encoded.
    pub fn digest(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Parses a config document. A manifest is accepted too: its `[config]` table is used.
pub fn parse_config(text: &str) -> Result<Loaded, LoadError> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| LoadError::Syntax(e.to_string()))?;
    if table.contains_key("manifest") {
        table = match table.remove("config") {
            Some(Value::Table(t)) => t,
            _ => return Err(LoadError::Schema("manifest has no [config] table".into())),
        };
    }
    let loaded = if table.contains_key("grid") {
        Loaded::Sweep(parse_sweep(table)?)
    } else {
        Loaded::Run(parse_run(table)?)
    };
    loaded.validate()?;
    Ok(loaded)
}

pub fn load_config(path: &Path) -> Result<Loaded, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
