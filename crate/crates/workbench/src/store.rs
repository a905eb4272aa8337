//! Content-addressed run directories and their manifests.
//!
//! A run lives in `<output_dir>/<first 16 hex digits of the config hash>/`.
//! `manifest.json` lists every artifact once with its SHA-256 and the stage
//! that wrote it, plus each stage's status; it contains nothing that varies
//! between identical runs. Wall-clock timings go to `timings.json`.

use crate::config::RunConfig;
use crate::error::{Result, WorkbenchError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum StageStatus {
    Complete,
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub stage: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub version: String,
    pub stages: BTreeMap<String, StageStatus>,
    /// Sorted by path.
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct RunStore {
    root: PathBuf,
    manifest: Manifest,
    timings: BTreeMap<String, f64>,
}

impl RunStore {
    pub fn run_dir(cfg: &RunConfig) -> PathBuf {
        cfg.output_dir.join(&cfg.hash()[..16])
    }

    /// Opens (or creates) the run directory of `cfg`. An existing manifest
    /// is kept only if it belongs to the same config hash.
    pub fn open(cfg: &RunConfig) -> Result<Self> {
        let hash = cfg.hash();
        let root = Self::run_dir(cfg);
        std::fs::create_dir_all(&root).map_err(|e| WorkbenchError::io(&root, e))?;
        let fresh = Manifest {
            config_hash: hash.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            stages: BTreeMap::new(),
            artifacts: Vec::new(),
        };
        let manifest = match std::fs::read(root.join("manifest.json")) {
            Ok(bytes) => match serde_json::from_slice::<Manifest>(&bytes) {
                Ok(m) if m.config_hash == hash => m,
                _ => fresh,
            },
            Err(_) => fresh,
        };
        let timings = std::fs::read(root.join("timings.json"))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok())
            .unwrap_or_default();
        let mut store = Self { root, manifest, timings };
        if !store.is_complete("config") {
            store.begin("config")?;
            store.write("config", "config.toml", cfg.to_toml().as_bytes())?;
            store.finish("config", 0.0)?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn verify(&self, a: &Artifact) -> bool {
        std::fs::read(self.path(&a.path)).is_ok_and(|b| sha256_hex(&b) == a.sha256)
    }

    /// Complete, and every artifact it wrote is present and unmodified.
    pub fn is_complete(&self, stage: &str) -> bool {
        self.manifest.stages.get(stage) == Some(&StageStatus::Complete)
            && self.manifest.artifacts.iter().filter(|a| a.stage == stage).all(|a| self.verify(a))
    }

    /// Forgets (and deletes) what `stage` wrote before.
    pub fn begin(&mut self, stage: &str) -> Result<()> {
        let (old, keep): (Vec<Artifact>, Vec<Artifact>) =
            std::mem::take(&mut self.manifest.artifacts).into_iter().partition(|a| a.stage == stage);
        self.manifest.artifacts = keep;
        for a in old {
            let _ = std::fs::remove_file(self.path(&a.path));
        }
        self.manifest.stages.remove(stage);
        self.save()
    }

    pub fn write(&mut self, stage: &str, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| WorkbenchError::io(dir, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| WorkbenchError::io(&path, e))?;
        let entry = Artifact { path: rel.to_string(), sha256: sha256_hex(bytes), stage: stage.to_string() };
        match self.manifest.artifacts.binary_search_by(|a| a.path.as_str().cmp(rel)) {
            Ok(i) => self.manifest.artifacts[i] = entry,
            Err(i) => self.manifest.artifacts.insert(i, entry),
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, stage: &str, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.write(stage, rel, text.as_bytes())
    }

    pub fn finish(&mut self, stage: &str, seconds: f64) -> Result<()> {
        self.manifest.stages.insert(stage.to_string(), StageStatus::Complete);
        self.timings.insert(stage.to_string(), seconds);
        self.save()
    }

    pub fn fail(&mut self, stage: &str, message: &str) -> Result<()> {
        self.manifest.stages.insert(stage.to_string(), StageStatus::Failed { message: message.to_string() });
        self.save()
    }

    /// Reads an artifact of a completed stage, checking its checksum.
    pub fn read(&self, rel: &str) -> Result<Vec<u8>> {
        let a = self
            .manifest
            .artifacts
            .iter()
            .find(|a| a.path == rel)
            .ok_or_else(|| WorkbenchError::MissingDependency(format!("artifact {rel} is not in the manifest")))?;
        let bytes = std::fs::read(self.path(rel)).map_err(|e| WorkbenchError::io(self.path(rel), e))?;
        if sha256_hex(&bytes) != a.sha256 {
            return Err(WorkbenchError::MissingDependency(format!(
                "artifact {rel} does not match its checksum; rerun stage `{}`",
                a.stage
            )));
        }
        Ok(bytes)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&self, rel: &str) -> Result<T> {
        serde_json::from_slice(&self.read(rel)?)
            .map_err(|e| WorkbenchError::MissingDependency(format!("artifact {rel} is unreadable: {e}")))
    }

    /// Paths written by `stage`, in manifest order.
    pub fn artifacts_of(&self, stage: &str) -> Vec<String> {
        self.manifest.artifacts.iter().filter(|a| a.stage == stage).map(|a| a.path.clone()).collect()
    }

    fn save(&self) -> Result<()> {
        let write = |name: &str, text: String| {
            let p = self.root.join(name);
            std::fs::write(&p, text + "\n").map_err(|e| WorkbenchError::io(&p, e))
        };
        write("manifest.json", serde_json::to_string_pretty(&self.manifest).expect("manifest serializes"))?;
        write("timings.json", serde_json::to_string_pretty(&self.timings).expect("timings serialize"))
    }
}
