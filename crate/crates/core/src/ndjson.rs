//! Newline-delimited JSON record files: one serialized value per line,
//! written through a sibling temp file and atomically renamed into place.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NdjsonError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad record in {path} line {line}: {reason}")]
    BadRecord { path: PathBuf, line: usize, reason: String },
}

pub fn write_ndjson<T: Serialize>(
    path: &Path,
    items: impl IntoIterator<Item = T>,
) -> Result<u64, NdjsonError> {
    let io = |e| NdjsonError::Io { path: path.to_path_buf(), source: e };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut n = 0u64;
    {
        let mut w = BufWriter::new(fs::File::create(&tmp).map_err(io)?);
        for item in items {
            serde_json::to_writer(&mut w, &item)
                .map_err(|e| NdjsonError::BadRecord { path: path.into(), line: n as usize + 1, reason: e.to_string() })?;
            w.write_all(b"\n").map_err(io)?;
            n += 1;
        }
        w.flush().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)?;
    Ok(n)
}

pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, NdjsonError> {
    let f = fs::File::open(path).map_err(|e| NdjsonError::Io { path: path.into(), source: e })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| NdjsonError::Io { path: path.into(), source: e })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| NdjsonError::BadRecord {
            path: path.into(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}
