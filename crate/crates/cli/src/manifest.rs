//! Run manifests and all-or-nothing output writing.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Settings;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// The invocation, program name excluded.
    pub argv: Vec<String>,
    /// Effective configuration after file and flag resolution.
    pub config: Settings,
    pub config_sha256: String,
    pub seed: u64,
    /// Named seeds derived from the root seed, where a command forwards one.
    pub derived_seeds: Vec<(String, u64)>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub version: String,
    pub timing: Timing,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects a command's outputs in memory so nothing is written unless the
/// whole command succeeds.
pub struct Run {
    command: String,
    argv: Vec<String>,
    settings: Settings,
    started: Instant,
    started_unix_ms: u128,
    inputs: Vec<FileRecord>,
    outputs: Vec<(String, Vec<u8>)>,
    derived_seeds: Vec<(String, u64)>,
}

impl Run {
    pub fn new(command: &str, argv: Vec<String>, settings: Settings) -> Self {
        Self {
            command: command.to_string(),
            argv,
            settings,
            started: Instant::now(),
            started_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or_default(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            derived_seeds: Vec::new(),
        }
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    /// Reads an input file, recording its hash.
    pub fn read_input(&mut self, path: &Path) -> anyhow::Result<Vec<u8>> {
        if !path.is_file() {
            return Err(crate::Invalid(format!("input file {} not found", path.display())).into());
        }
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileRecord {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn derived_seed(&mut self, name: &str, seed: u64) {
        self.derived_seeds.push((name.to_string(), seed));
    }

    pub fn output(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.outputs.push((name.to_string(), bytes.into()));
    }

    /// Writes every output and then the manifest into `dir`.
    pub fn finish(self, dir: &Path) -> anyhow::Result<RunManifest> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut outputs = Vec::with_capacity(self.outputs.len());
        for (name, bytes) in &self.outputs {
            let path = dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            outputs.push(FileRecord {
                path,
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = RunManifest {
            command: self.command,
            argv: self.argv,
            config_sha256: sha256_hex(self.settings.to_json().as_bytes()),
            seed: self.settings.seed,
            config: self.settings,
            derived_seeds: self.derived_seeds,
            inputs: self.inputs,
            outputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timing: Timing {
                started_unix_ms: self.started_unix_ms,
                elapsed_ms: self.started.elapsed().as_millis(),
            },
        };
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}
