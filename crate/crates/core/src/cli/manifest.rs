//! Per-command run manifests, written atomically on success and failure.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub path: String,
    /// Interactions parsed from the file, before filtering.
    pub records: usize,
    /// Hex SHA-256 of the raw file bytes.
    pub content_hash: String,
}

impl DatasetFingerprint {
    pub fn of(path: &Path, bytes: &[u8], records: usize) -> Self {
        Self {
            path: path.display().to_string(),
            records,
            content_hash: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub dataset: Option<DatasetFingerprint>,
    pub timings: Vec<PhaseTiming>,
    /// Files written by the command, relative to the output folder.
    pub artifacts: Vec<String>,
    /// `ok` or `failed`.
    pub status: String,
    pub failure: Option<String>,
    /// Process exit code the command ended with.
    pub exit_code: i32,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config_hash: config_hash.to_owned(),
            seed,
            dataset: None,
            timings: Vec::new(),
            artifacts: Vec::new(),
            status: "ok".into(),
            failure: None,
            exit_code: 0,
        }
    }

    /// Runs `f` and records its wall-clock time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(PhaseTiming {
            phase: phase.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn fail(&mut self, reason: String, exit_code: i32) {
        self.status = "failed".into();
        self.failure = Some(reason);
        self.exit_code = exit_code;
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_atomic(path, json.as_bytes())
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
