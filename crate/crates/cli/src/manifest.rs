//! Run manifests: every subcommand records its argv, input hashes, config
//! snapshot, seed, tool version, and output paths. Replaying the recorded
//! argv against the same inputs reproduces deterministic outputs byte for
//! byte (the manifest contains no timestamps or other ambient state).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

pub struct ManifestBuilder {
    subcommand: String,
    inputs: BTreeMap<String, String>,
    config: serde_json::Value,
    seed: Option<u64>,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            inputs: BTreeMap::new(),
            config: serde_json::Value::Null,
            seed: None,
            outputs: Vec::new(),
        }
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        let hash = mmt_core::io::sha256_file(path)
            .with_context(|| format!("hashing {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), hash);
        Ok(self)
    }

    pub fn input_opt(self, path: Option<&PathBuf>) -> Result<Self> {
        match path {
            Some(p) => self.input(p),
            None => Ok(self),
        }
    }

    pub fn config(mut self, config: serde_json::Value) -> Self {
        self.config = config;
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn output_opt(self, path: Option<&PathBuf>) -> Self {
        match path {
            Some(p) => self.output(p),
            None => self,
        }
    }

    pub fn build(self) -> RunManifest {
        RunManifest {
            subcommand: self.subcommand,
            argv: std::env::args().collect(),
            inputs: self.inputs,
            config: self.config,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs,
        }
    }
}

/// Writes the manifest next to the primary output (`<out>.manifest.json`)
/// or to an explicit `--manifest` path. With neither, the manifest is
/// skipped (stdout-streaming runs opt in via `--manifest`).
pub fn write(
    manifest: &RunManifest,
    explicit: Option<&PathBuf>,
    primary_output: Option<&Path>,
) -> Result<()> {
    let path = match (explicit, primary_output) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => {
            let mut name = out.file_name().unwrap_or_default().to_os_string();
            name.push(".manifest.json");
            out.with_file_name(name)
        }
        (None, None) => return Ok(()),
    };
    let body = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, body + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
