//! `manifest.toml`: the resolved config of an output directory plus provenance.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::config::{parse_config, Loaded};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TOOL: &str = "conflict";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub tool: String,
    pub version: String,
    /// `run` or `sweep`.
    pub kind: String,
    /// SHA-256 of the canonical TOML of the `[config]` table.
    pub config_sha256: String,
    /// RFC 3339, UTC.
    pub created: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub config: Loaded,
}

impl Manifest {
    pub fn new(config: Loaded) -> Self {
        let header = ManifestHeader {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            kind: config.kind().to_string(),
            config_sha256: config.digest(),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        };
        Manifest { header, config }
    }

    pub fn to_toml(&self) -> String {
        let mut doc = Table::new();
        doc.insert(
            "manifest".into(),
            Value::Table(Table::try_from(&self.header).expect("header serializes")),
        );
        doc.insert("config".into(), Value::Table(self.config.to_table()));
        toml::to_string(&doc).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc: Table = text.parse().context("manifest is not valid TOML")?;
        let header: ManifestHeader = doc
            .remove("manifest")
            .context("manifest has no [manifest] table")?
            .try_into()
            .context("malformed [manifest] table")?;
        let config = parse_config(text)?;
        if header.kind != config.kind() {
            bail!("manifest kind `{}` does not match its config ({})", header.kind, config.kind());
        }
        if header.config_sha256 != config.digest() {
            bail!("manifest digest does not match its [config] table");
        }
        Ok(Manifest { header, config })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_toml()).with_context(|| format!("cannot write {}", path.display()))
    }
}
