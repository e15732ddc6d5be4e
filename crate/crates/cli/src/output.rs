//! Output directory handling: staged writes, content hashes and the run
//! manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, Context, ErrorKind};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_FORMAT: &str = "scriptswitch-run/1";
const STAGING_DIR: &str = ".staging";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Single-line JSON for model files, where indentation would dominate the size.
pub fn to_compact_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("model serializes")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub fingerprint: String,
    pub summary: serde_json::Value,
    /// Output path (relative to the output directory) to content hash.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub seeds: BTreeMap<String, u64>,
    /// Input path (relative to the data directory) to content hash.
    pub inputs: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn new(config: serde_json::Value) -> Self {
        let config_sha256 = sha256_hex(&to_json(&config));
        Manifest {
            format: MANIFEST_FORMAT.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            config_sha256,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            stages: BTreeMap::new(),
        }
    }

    /// The manifest in `dir`, if one exists and parses.
    pub fn read(dir: &Path) -> Option<Manifest> {
        let raw = fs::read(dir.join(MANIFEST_FILE)).ok()?;
        serde_json::from_slice::<Manifest>(&raw)
            .ok()
            .filter(|m| m.format == MANIFEST_FORMAT)
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir).ctx(ErrorKind::Data, "manifest")?;
        fs::write(dir.join(MANIFEST_FILE), to_json(self)).ctx(ErrorKind::Data, "manifest")
    }

    /// True when `stage` completed with `fingerprint` and all of its outputs
    /// are still on disk unchanged.
    pub fn is_fresh(&self, dir: &Path, stage: &str, fingerprint: &str) -> bool {
        let Some(record) = self.stages.get(stage) else {
            return false;
        };
        record.fingerprint == fingerprint
            && record
                .outputs
                .iter()
                .all(|(rel, hash)| hash_file(&dir.join(rel)).ok().as_deref() == Some(hash.as_str()))
    }
}

/// Collects a stage's files under a staging directory and moves them into
/// the output directory only once the whole stage has succeeded. Dropping
/// an uncommitted writer deletes everything it wrote.
pub struct StageWriter {
    stage: &'static str,
    root: PathBuf,
    staging: PathBuf,
    files: BTreeMap<String, String>,
    committed: bool,
}

impl StageWriter {
    pub fn new(root: &Path, stage: &'static str) -> CliResult<Self> {
        let staging = root.join(STAGING_DIR).join(stage);
        if staging.exists() {
            fs::remove_dir_all(&staging).ctx(ErrorKind::Data, stage)?;
        }
        fs::create_dir_all(&staging).ctx(ErrorKind::Data, stage)?;
        Ok(StageWriter {
            stage,
            root: root.to_path_buf(),
            staging,
            files: BTreeMap::new(),
            committed: false,
        })
    }

    /// Writes `bytes` to `rel` (a `/`-separated path below the output root).
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.staging.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).ctx(ErrorKind::Data, self.stage)?;
        }
        fs::write(&path, bytes).ctx(ErrorKind::Data, self.stage)?;
        self.files.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Directory for library code that writes its own files; call
    /// [`StageWriter::adopt`] for each file afterwards.
    pub fn staging_path(&self, rel: &str) -> PathBuf {
        self.staging.join(rel)
    }

    pub fn adopt(&mut self, rel: &str) -> CliResult<()> {
        let hash = hash_file(&self.staging.join(rel)).ctx(ErrorKind::Data, self.stage)?;
        self.files.insert(rel.to_string(), hash);
        Ok(())
    }

    pub fn commit(mut self) -> CliResult<BTreeMap<String, String>> {
        for rel in self.files.keys() {
            let dest = self.root.join(rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).ctx(ErrorKind::Data, self.stage)?;
            }
            fs::rename(self.staging.join(rel), &dest)
                .map_err(|e| CliError::new(ErrorKind::Data, self.stage, format!("moving {rel} into place: {e}")))?;
        }
        self.committed = true;
        self.cleanup();
        Ok(std::mem::take(&mut self.files))
    }

    fn cleanup(&self) {
        let _ = fs::remove_dir_all(&self.staging);
        let parent = self.root.join(STAGING_DIR);
        // only succeeds once no other stage is staging
        let _ = fs::remove_dir(parent);
    }
}

impl Drop for StageWriter {
    fn drop(&mut self) {
        if !self.committed {
            self.cleanup();
        }
    }
}
