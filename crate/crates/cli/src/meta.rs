//! Every output directory gets a `meta.json` describing the run: tool
//! version, the exact subcommand, seed and config hash where applicable.
//! No timestamps; reruns of the same command on the same inputs produce
//! byte-identical metadata.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Serialize)]
pub(crate) struct RunMeta {
    tool: &'static str,
    version: &'static str,
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_sha256: Option<String>,
    args: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    stats: BTreeMap<String, u64>,
}

impl RunMeta {
    pub(crate) fn new(command: &str) -> Self {
        RunMeta {
            tool: "latwar",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: None,
            config_sha256: None,
            args: BTreeMap::new(),
            stats: BTreeMap::new(),
        }
    }

    pub(crate) fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Hash of the verbatim config file bytes, so a run can be tied back
    /// to the exact matcher or profile definition it used.
    pub(crate) fn config_file(mut self, path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
        self.config_sha256 = Some(hex::encode(Sha256::digest(&bytes)));
        Ok(self)
    }

    pub(crate) fn arg(mut self, key: &str, value: impl ToString) -> Self {
        self.args.insert(key.to_string(), value.to_string());
        self
    }

    pub(crate) fn stat(mut self, key: &str, value: u64) -> Self {
        self.stats.insert(key.to_string(), value);
        self
    }

    pub(crate) fn write(self, dir: &Path) -> Result<(), CliError> {
        self.write_to(&dir.join("meta.json"))
    }

    /// For commands whose output is a single file: the metadata goes to a
    /// named sidecar instead of `meta.json`.
    pub(crate) fn write_to(self, path: &Path) -> Result<(), CliError> {
        write_json_pretty(path, &self)
    }
}

/// Pretty JSON plus trailing newline, the convention for every non-NDJSON
/// artifact the CLI writes.
pub(crate) fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    Ok(())
}

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| anyhow::anyhow!("creating {}: {e}", path.display()))?;
    Ok(())
}
