//! Run manifests: every command records what it ran, on what, and how
//! long it took. Timings vary between runs; everything else is
//! reproducible from the seed and inputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<sagaze_core::gbdt::TrainConfig>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, serde_json::Value>,
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: None,
                config: None,
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
                timings_ms: BTreeMap::new(),
                notes: BTreeMap::new(),
            },
            started: Instant::now(),
        }
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.manifest.seed = Some(seed);
        self
    }

    pub fn config(&mut self, config: &sagaze_core::gbdt::TrainConfig) -> &mut Self {
        self.manifest.config = Some(config.clone());
        self
    }

    pub fn input(&mut self, name: &str, path: impl AsRef<Path>) -> &mut Self {
        self.manifest.inputs.insert(name.to_string(), path.as_ref().display().to_string());
        self
    }

    pub fn output(&mut self, path: impl AsRef<Path>) -> &mut Self {
        self.manifest.outputs.push(path.as_ref().display().to_string());
        self
    }

    pub fn timing(&mut self, name: &str, ms: u128) -> &mut Self {
        self.manifest.timings_ms.insert(name.to_string(), ms);
        self
    }

    pub fn note(&mut self, name: &str, value: serde_json::Value) -> &mut Self {
        self.manifest.notes.insert(name.to_string(), value);
        self
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(mut self, out_dir: &Path) -> anyhow::Result<()> {
        self.manifest.timings_ms.insert("total".to_string(), self.started.elapsed().as_millis());
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self.manifest)?)?;
        Ok(())
    }
}

/// Create the output directory if needed.
pub fn ensure_out_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
