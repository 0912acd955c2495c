//! Resumable-range checkpoint: a tiny JSON file `{"last_height":N}` written
//! atomically (temp file + rename in the same directory) after every fully
//! processed block. Absence means "never ran"; unparseable content is an
//! explicit error because guessing a resume point can skip blocks.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub last_height: u64,
}

pub fn read_checkpoint(path: &Path) -> Result<Option<Checkpoint>, IngestError> {
    let raw = match fs::read_to_string(path) {
        Ok(raw) => raw,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(IngestError::Io { path: path.to_path_buf(), source: e }),
    };
    serde_json::from_str(&raw)
        .map(Some)
        .map_err(|_| IngestError::CheckpointCorrupt { path: path.to_path_buf() })
}

pub fn write_checkpoint(path: &Path, last_height: u64) -> Result<(), IngestError> {
    let io = |e| IngestError::Io { path: path.to_path_buf(), source: e };
    // Sibling temp name keeps the rename on one filesystem. Single writer
    // by contract, so a fixed suffix cannot race itself.
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let body = serde_json::to_string(&Checkpoint { last_height }).expect("checkpoint serializes");
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(body.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}
