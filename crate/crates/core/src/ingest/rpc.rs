//! Blocking Tendermint RPC client (v0.34 JSON shapes) with bounded retry.
//!
//! `/block` gives payloads, `/block_results` gives execution results in the
//! same order but without hashes; `pair_results` stitches the two and is
//! the only place hashes are attached. Transient transport failures retry
//! with doubling backoff; a node answering "height not available" fails
//! immediately since waiting will not grow a pruned store.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use base64::Engine;
use chrono::{DateTime, SubsecRound, Utc};
use serde::Deserialize;
use serde_json::Value;

use super::{IngestError, LogEvent, RawBlock, TxResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 5, initial_backoff: Duration::from_millis(500) }
    }
}

pub struct RpcClient {
    base: String,
    http: reqwest::blocking::Client,
    retry: RetryPolicy,
    parse_warnings: AtomicU64,
}

#[derive(Deserialize)]
struct RpcEnvelope {
    result: Option<Value>,
    error: Option<RpcError>,
}

#[derive(Deserialize)]
struct RpcError {
    message: String,
    #[serde(default)]
    data: Option<String>,
}

impl RpcClient {
    pub fn new(endpoint: &str) -> Result<Self, IngestError> {
        Self::with_retry(endpoint, RetryPolicy::default())
    }

    pub fn with_retry(endpoint: &str, retry: RetryPolicy) -> Result<Self, IngestError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(15))
            .build()
            .map_err(|e| IngestError::EndpointUnreachable { attempts: 0, last_error: e.to_string() })?;
        Ok(RpcClient { base: endpoint.trim_end_matches('/').to_string(), http, retry, parse_warnings: AtomicU64::new(0) })
    }

    /// Log lines that failed to parse into events so far (kept, not fatal).
    pub fn parse_warnings(&self) -> u64 {
        self.parse_warnings.load(Ordering::Relaxed)
    }

    fn call(&self, path: &str, height: u64) -> Result<Value, IngestError> {
        let url = format!("{}/{}?height={}", self.base, path, height);
        let mut backoff = self.retry.initial_backoff;
        let mut last_error = String::new();
        let attempts = self.retry.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            let body = match self.http.get(&url).send().and_then(|r| r.text()) {
                Ok(body) => body,
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            };
            // Tendermint reports errors over HTTP 500 with a JSON-RPC error
            // body, so classify from the body rather than the status line.
            match serde_json::from_str::<RpcEnvelope>(&body) {
                Ok(RpcEnvelope { result: Some(result), error: None }) => return Ok(result),
                Ok(RpcEnvelope { error: Some(err), .. }) => {
                    let text = format!("{} {}", err.message, err.data.unwrap_or_default());
                    if text.contains("height") {
                        return Err(IngestError::HeightOutOfRange { height });
                    }
                    last_error = text;
                }
                Ok(_) => {
                    return Err(IngestError::MalformedResponse {
                        height,
                        reason: "envelope has neither result nor error".into(),
                    })
                }
                Err(e) => last_error = format!("unparseable body: {e}"),
            }
        }
        Err(IngestError::EndpointUnreachable { attempts, last_error })
    }

    pub fn fetch_block(&self, height: u64) -> Result<RawBlock, IngestError> {
        let result = self.call("block", height)?;
        let malformed = |reason: &str| IngestError::MalformedResponse { height, reason: reason.into() };
        let header = &result["block"]["header"];
        let got_height: u64 = header["height"]
            .as_str()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("missing block.header.height"))?;
        if got_height != height {
            return Err(malformed(&format!("asked {height}, got {got_height}")));
        }
        let time: DateTime<Utc> = header["time"]
            .as_str()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("missing block.header.time"))?;
        let txs: Vec<String> = match &result["block"]["data"]["txs"] {
            Value::Null => Vec::new(),
            Value::Array(items) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<_>>()
                .ok_or_else(|| malformed("non-string tx payload"))?,
            _ => return Err(malformed("block.data.txs not an array")),
        };
        Ok(RawBlock::new(height, time.trunc_subsecs(3), txs))
    }

    /// Results in block order, hashes left empty: `/block_results` does not
    /// echo them. Pair with the block before use.
    pub fn fetch_block_results(&self, height: u64) -> Result<Vec<TxResult>, IngestError> {
        let result = self.call("block_results", height)?;
        let list = match &result["txs_results"] {
            Value::Null => return Ok(Vec::new()),
            Value::Array(items) => items,
            _ => {
                return Err(IngestError::MalformedResponse {
                    height,
                    reason: "txs_results not an array".into(),
                })
            }
        };
        let mut out = Vec::with_capacity(list.len());
        for entry in list {
            let code = entry["code"].as_u64().unwrap_or(0) as u32;
            let gas_used = entry["gas_used"]
                .as_str()
                .and_then(|s| s.parse().ok())
                .or_else(|| entry["gas_used"].as_u64())
                .unwrap_or(0);
            let events = if code == 0 { self.parse_events(entry) } else { Vec::new() };
            out.push(TxResult::new(String::new(), code, gas_used, events));
        }
        Ok(out)
    }

    /// Events for a successful tx: prefer the structured `log` JSON, fall
    /// back to top-level `events` (base64 attributes on older nodes). An
    /// unparseable log keeps the tx with empty events and counts a warning.
    fn parse_events(&self, entry: &Value) -> Vec<LogEvent> {
        if let Some(log) = entry["log"].as_str() {
            if let Some(events) = parse_raw_log(log) {
                return events;
            }
            if !log.is_empty() {
                self.parse_warnings.fetch_add(1, Ordering::Relaxed);
                log::warn!("unparseable tx log, keeping tx with no events");
            }
        }
        if let Value::Array(raw) = &entry["events"] {
            return raw.iter().filter_map(|ev| parse_structured_event(ev, true)).collect();
        }
        Vec::new()
    }

    pub fn fetch(&self, height: u64) -> Result<(RawBlock, Vec<TxResult>), IngestError> {
        let block = self.fetch_block(height)?;
        let results = self.fetch_block_results(height)?;
        let paired = pair_results(&block, results)?;
        Ok((block, paired))
    }
}

/// Attach block hashes to hashless results, by position.
pub fn pair_results(block: &RawBlock, results: Vec<TxResult>) -> Result<Vec<TxResult>, IngestError> {
    if block.txs.len() != results.len() {
        return Err(IngestError::ResultCountMismatch {
            height: block.height,
            txs: block.txs.len(),
            results: results.len(),
        });
    }
    Ok(results
        .into_iter()
        .zip(&block.tx_hashes)
        .map(|(r, hash)| TxResult { tx_hash: hash.clone(), ..r })
        .collect())
}

/// The `log` field: a JSON string holding per-message event groups with
/// plain-text attributes.
fn parse_raw_log(log: &str) -> Option<Vec<LogEvent>> {
    #[derive(Deserialize)]
    struct MsgLog {
        #[serde(default)]
        events: Vec<Value>,
    }
    let msgs: Vec<MsgLog> = serde_json::from_str(log).ok()?;
    let mut out = Vec::new();
    for m in msgs {
        for ev in &m.events {
            out.push(parse_structured_event(ev, false)?);
        }
    }
    Some(out)
}

/// `decode_b64` only on the legacy `events` path; `log` attributes are
/// plain text and must not be second-guessed.
fn parse_structured_event(ev: &Value, decode_b64: bool) -> Option<LogEvent> {
    let event_type = ev["type"].as_str()?.to_string();
    let mut attributes = Vec::new();
    for attr in ev["attributes"].as_array()? {
        let key = attr["key"].as_str()?;
        let value = attr["value"].as_str().unwrap_or("");
        if decode_b64 {
            attributes.push((decode_attr(key), decode_attr(value)));
        } else {
            attributes.push((key.to_string(), value.to_string()));
        }
    }
    Some(LogEvent { event_type, attributes })
}

/// Older nodes base64-encode attribute keys/values in `events`. Decode when
/// the text is valid base64 of valid utf-8, otherwise take it verbatim.
fn decode_attr(s: &str) -> String {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'+' || b == b'/' || b == b'=') {
        return s.to_string();
    }
    base64::engine::general_purpose::STANDARD
        .decode(s)
        .ok()
        .and_then(|b| String::from_utf8(b).ok())
        .filter(|d| d.chars().all(|c| !c.is_control()))
        .unwrap_or_else(|| s.to_string())
}

impl super::BlockSource for RpcClient {
    fn next_block(
        &mut self,
        cursor: u64,
        end: u64,
    ) -> Result<Option<(RawBlock, Vec<TxResult>)>, IngestError> {
        if cursor > end {
            return Ok(None);
        }
        self.fetch(cursor).map(Some)
    }
}
