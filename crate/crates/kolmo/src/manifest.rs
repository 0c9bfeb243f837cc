//! Run manifests: what was run, on which inputs, producing which bytes.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the global flags, verbatim.
    pub args: Vec<String>,
    /// SHA-256 of every file the command read, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    pub output_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn new(subcommand: String, args: Vec<String>, inputs: &[std::path::PathBuf], output: &[u8]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in inputs {
            map.insert(p.display().to_string(), hash_file(p)?);
        }
        Ok(RunManifest {
            tool: "kolmo".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand,
            args,
            inputs: map,
            output_sha256: sha256_hex(output),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
