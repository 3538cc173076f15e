//! Run manifests: every output file gets a `<name>.manifest.json` sibling
//! naming the tool version, the subcommand, the seed and every input with
//! its content hash. Manifests carry no timestamps so reruns stay
//! byte-identical.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::fsio;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub counts: BTreeMap<String, u64>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            tool: String::from("eponym"),
            version: String::from(env!("CARGO_PKG_VERSION")),
            subcommand: String::from(subcommand),
            seed: None,
            inputs: Vec::new(),
            counts: BTreeMap::new(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, stage: &'static str, path: &Path) -> Result<Self, Error> {
        let (sha256, bytes) = sha256_file(path).map_err(|e| Error::io(stage, path, e))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
            bytes,
        });
        Ok(self)
    }

    pub fn count(mut self, key: &str, value: u64) -> Self {
        self.counts.insert(String::from(key), value);
        self
    }

    /// Write the manifest next to `output` as `<output>.manifest.json`.
    pub fn write_for(&self, stage: &'static str, output: &Path) -> Result<(), Error> {
        let path = manifest_path(output);
        let body = serde_json::to_vec_pretty(self).map_err(|e| Error::Internal {
            stage,
            message: format!("manifest serialization failed: {e}"),
        })?;
        fsio::write_atomic_bytes(&path, &body).map_err(|e| Error::io(stage, &path, e))
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Streamed SHA-256 of a file, hex-encoded, plus its size.
pub fn sha256_file(path: &Path) -> std::io::Result<(String, u64)> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}
