use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, StnetError};

/// Hex SHA-256 of a byte string.
pub fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn fingerprint_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| StnetError::io(path, e))?;
    Ok(fingerprint(&bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileRecord {
            path: path.display().to_string(),
            sha256: fingerprint_file(path)?,
        })
    }
}

/// What a command read, wrote and how long it took.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub started_at: String,
    pub config: BTreeMap<String, String>,
    /// SHA-256 of the primary dataset file.
    pub dataset_fingerprint: Option<String>,
    pub seed: u64,
    pub inputs: Vec<FileRecord>,
    pub artifacts: Vec<FileRecord>,
    pub timings_s: BTreeMap<String, f64>,
    /// Extra facts worth keeping with the run, e.g. generator parameters.
    pub notes: BTreeMap<String, String>,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            dataset_fingerprint: None,
            seed,
            inputs: Vec::new(),
            artifacts: Vec::new(),
            timings_s: BTreeMap::new(),
            notes: BTreeMap::new(),
            error: None,
        }
    }

    pub fn file_name(command: &str) -> String {
        format!("manifest_{command}.json")
    }

    pub fn record_input(&mut self, path: &Path) -> Result<FileRecord> {
        let rec = FileRecord::of(path)?;
        self.inputs.push(rec.clone());
        Ok(rec)
    }

    pub fn record_artifact(&mut self, path: &Path) -> Result<()> {
        let rec = FileRecord::of(path)?;
        self.artifacts.retain(|a| a.path != rec.path);
        self.artifacts.push(rec);
        Ok(())
    }

    pub fn artifact(&self, suffix: &str) -> Option<&FileRecord> {
        self.artifacts.iter().find(|a| a.path.ends_with(suffix))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(Self::file_name(&self.command));
        fs::write(&path, self.to_json() + "\n").map_err(|e| StnetError::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| StnetError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| StnetError::Config(format!("{} is not a run manifest: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            fingerprint(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("train", BTreeMap::new(), 3);
        let f = dir.path().join("a.txt");
        fs::write(&f, "x").unwrap();
        m.record_artifact(&f).unwrap();
        m.record_artifact(&f).unwrap();
        m.error = Some("boom".into());
        let path = m.write(dir.path()).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.artifacts.len(), 1);
    }
}
