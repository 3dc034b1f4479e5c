//! Run manifests tying every artifact to the settings that produced it.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::reconstruct::ThresholdMode;
use crate::sage::{Activation, AdamConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epochs: usize,
    pub layer_dims: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub optimizer: AdamConfig,
    pub model_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Digest of every setting except timestamps; stable across repeated runs.
    pub run_id: String,
    pub command: String,
    pub scenario_source: String,
    pub scenario_hash: String,
    pub dataset_path: Option<String>,
    pub dataset_seed: Option<u64>,
    pub samples: Option<usize>,
    pub model_snapshot_path: Option<String>,
    pub hyperparameters: Option<Hyperparameters>,
    pub threshold: Option<f64>,
    pub threshold_mode: Option<ThresholdMode>,
    pub correlation_source: Option<String>,
    pub zero_division: String,
    pub started_at_unix: u64,
    pub finished_at_unix: u64,
    /// Artifact file name → SHA-256 of its contents.
    pub artifacts: BTreeMap<String, String>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Short digest of any serializable settings record.
pub fn settings_hash<T: Serialize>(settings: &T) -> String {
    let bytes = serde_json::to_vec(settings).expect("settings serialize");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

impl RunManifest {
    pub fn new(command: &str, scenario_source: &str, scenario_hash: &str) -> Self {
        Self {
            tool_version: TOOL_VERSION.into(),
            run_id: String::new(),
            command: command.into(),
            scenario_source: scenario_source.into(),
            scenario_hash: scenario_hash.into(),
            dataset_path: None,
            dataset_seed: None,
            samples: None,
            model_snapshot_path: None,
            hyperparameters: None,
            threshold: None,
            threshold_mode: None,
            correlation_source: None,
            zero_division: crate::evaluation::ZERO_DIVISION_CONVENTION.into(),
            started_at_unix: unix_now(),
            finished_at_unix: 0,
            artifacts: BTreeMap::new(),
        }
    }

    /// Fills `run_id` from every field except timestamps and artifact digests.
    pub fn seal_run_id(&mut self) {
        let mut probe = self.clone();
        probe.run_id.clear();
        probe.started_at_unix = 0;
        probe.finished_at_unix = 0;
        probe.artifacts.clear();
        self.run_id = settings_hash(&probe);
    }

    /// Writes `contents` into `dir/name` and records its digest.
    pub fn write_artifact(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.artifacts.insert(name.into(), sha256_hex(contents));
        Ok(())
    }

    /// Records an artifact already written by someone else.
    pub fn record_existing(&mut self, dir: &Path, name: &str) -> Result<()> {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        self.artifacts.insert(name.into(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn finish(&mut self, dir: &Path) -> Result<()> {
        self.finished_at_unix = unix_now();
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
