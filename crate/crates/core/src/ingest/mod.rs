//! Block ingestion: RPC and fixture sources, payload decoding, and the
//! normalized per-message transaction stream every later stage consumes.
//!
//! A block arrives as an opaque payload list (`RawBlock`) plus the matching
//! execution results (`TxResult`). `normalize` pairs the two, decodes each
//! payload with a [`TxDecoder`] and emits one [`NormalizedTx`] per contract
//! execute message, in block order.

pub mod canonical;
pub mod checkpoint;
pub mod decoder;
pub mod fixtures;
pub mod rpc;

use std::path::PathBuf;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use sha2::Digest;
use thiserror::Error;

pub use canonical::{canonical_json, canonicalize, msg_hash};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use decoder::{Decoded, ExecuteMsg, FixtureJsonDecoder, TxDecoder};
pub use fixtures::{FixtureBlock, FixtureReader, FixtureTx};
pub use rpc::{RetryPolicy, RpcClient};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("height {height} outside the node's available range")]
    HeightOutOfRange { height: u64 },
    #[error("endpoint unreachable after {attempts} attempts: {last_error}")]
    EndpointUnreachable { attempts: u32, last_error: String },
    #[error("malformed RPC response at height {height}: {reason}")]
    MalformedResponse { height: u64, reason: String },
    #[error("block {height} has {txs} txs but {results} results")]
    ResultCountMismatch { height: u64, txs: usize, results: usize },
    #[error("fixture schema violation in {file} line {line}: {reason}")]
    FixtureSchemaError { file: PathBuf, line: usize, reason: String },
    #[error("checkpoint file corrupt: {path}")]
    CheckpointCorrupt { path: PathBuf },
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One event emitted during contract execution. Attribute order is
/// significant: swap fields are read positionally within a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEvent {
    #[serde(rename = "type")]
    pub event_type: String,
    pub attributes: Vec<(String, String)>,
}

/// A block as fetched: opaque base64 payloads plus their hashes.
///
/// Invariants: `txs.len() == tx_hashes.len()`; hashes are 64-char lowercase
/// hex; `time` carries at most millisecond precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawBlock {
    pub height: u64,
    pub time: DateTime<Utc>,
    pub txs: Vec<String>,
    pub tx_hashes: Vec<String>,
}

impl RawBlock {
    pub fn new(height: u64, time: DateTime<Utc>, txs: Vec<String>) -> Self {
        let tx_hashes = txs.iter().map(|payload| payload_hash(payload)).collect();
        RawBlock { height, time: time.trunc_subsecs(3), txs, tx_hashes }
    }
}

/// Hash of a transaction: sha256 over the base64-decoded payload, lowercase
/// hex. Payloads that fail base64 decoding are hashed over their raw bytes
/// so every tx still gets a stable identity.
pub fn payload_hash(payload_b64: &str) -> String {
    use base64::Engine;
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(payload_b64)
        .unwrap_or_else(|_| payload_b64.as_bytes().to_vec());
    hex::encode(sha2::Sha256::digest(&bytes))
}

/// Execution result for one transaction.
///
/// Invariant: `code != 0` implies `events` is empty; a reverted tx burns gas
/// but leaves no log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxResult {
    pub tx_hash: String,
    pub code: u32,
    pub gas_used: u64,
    pub events: Vec<LogEvent>,
}

impl TxResult {
    pub fn new(tx_hash: String, code: u32, gas_used: u64, events: Vec<LogEvent>) -> Self {
        let events = if code != 0 { Vec::new() } else { events };
        TxResult { tx_hash, code, gas_used, events }
    }
}

/// One contract execute message, flattened out of its carrier transaction.
/// `index_in_block` is the position in the block's normalized message
/// stream, so (height, index_in_block) is unique and order-preserving even
/// when one tx carries several messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedTx {
    pub tx_hash: String,
    pub height: u64,
    pub index_in_block: u32,
    pub sender: String,
    pub contract: String,
    pub execute_msg: serde_json::Value,
    pub code: u32,
    pub gas_used: u64,
    pub events: Vec<LogEvent>,
}

/// Counters accumulated while normalizing a range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NormalizeStats {
    pub blocks: u64,
    pub txs_seen: u64,
    pub messages: u64,
    pub non_execute: u64,
    pub decode_errors: u64,
}

/// Flatten one block into normalized execute messages.
///
/// Results must line up with the block's payloads one-to-one; a count
/// mismatch poisons the whole block. Individual payloads that fail to
/// decode are counted and skipped rather than aborting the range.
pub fn normalize(
    block: &RawBlock,
    results: &[TxResult],
    decoder: &dyn TxDecoder,
    stats: &mut NormalizeStats,
) -> Result<Vec<NormalizedTx>, IngestError> {
    if block.txs.len() != results.len() {
        return Err(IngestError::ResultCountMismatch {
            height: block.height,
            txs: block.txs.len(),
            results: results.len(),
        });
    }
    let mut out = Vec::new();
    let mut index: u32 = 0;
    stats.blocks += 1;
    for (payload, result) in block.txs.iter().zip(results) {
        stats.txs_seen += 1;
        match decoder.decode(payload) {
            Ok(Decoded::Execute(msgs)) => {
                for m in msgs {
                    out.push(NormalizedTx {
                        tx_hash: result.tx_hash.clone(),
                        height: block.height,
                        index_in_block: index,
                        sender: m.sender,
                        contract: m.contract,
                        execute_msg: canonicalize(&m.msg),
                        code: result.code,
                        gas_used: result.gas_used,
                        events: if result.code == 0 { result.events.clone() } else { Vec::new() },
                    });
                    index += 1;
                    stats.messages += 1;
                }
            }
            Ok(Decoded::NonExecute) => stats.non_execute += 1,
            Err(e) => {
                stats.decode_errors += 1;
                log::warn!("block {} tx {}: {e}", block.height, result.tx_hash);
            }
        }
    }
    Ok(out)
}

/// Anything that can hand over consecutive blocks of a height range.
pub trait BlockSource {
    /// Next block with height in `[cursor, end]`, ascending, or `None` when
    /// the range is exhausted.
    fn next_block(
        &mut self,
        cursor: u64,
        end: u64,
    ) -> Result<Option<(RawBlock, Vec<TxResult>)>, IngestError>;
}

/// What to do when the checkpoint file exists but cannot be parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptPolicy {
    /// Stop with `CheckpointCorrupt` (default; resuming from a guess could
    /// silently skip blocks).
    Fail,
    /// Ignore the file and start from the range beginning.
    Reset,
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    pub checkpoint: Option<PathBuf>,
    pub on_corrupt: CorruptPolicy,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions { checkpoint: None, on_corrupt: CorruptPolicy::Fail }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RangeStats {
    pub resumed_from: Option<u64>,
    pub last_height: Option<u64>,
    #[serde(flatten)]
    pub normalize: NormalizeStats,
}

/// Walk `[start, end]`, normalizing each block and feeding messages to
/// `sink`. The checkpoint (if configured) is advanced after each fully
/// processed block, so a rerun resumes at `last_height + 1`. A range that
/// is already complete yields an empty stream and succeeds.
pub fn iterate_range<S: BlockSource>(
    mut source: S,
    start: u64,
    end: u64,
    decoder: &dyn TxDecoder,
    opts: &IterateOptions,
    mut sink: impl FnMut(NormalizedTx),
) -> Result<RangeStats, IngestError> {
    let mut stats = RangeStats::default();
    let mut cursor = start;
    if let Some(path) = &opts.checkpoint {
        match read_checkpoint(path) {
            Ok(Some(cp)) => {
                stats.resumed_from = Some(cp.last_height);
                cursor = cursor.max(cp.last_height + 1);
            }
            Ok(None) => {}
            Err(IngestError::CheckpointCorrupt { path })
                if opts.on_corrupt == CorruptPolicy::Reset =>
            {
                log::warn!("ignoring corrupt checkpoint {}", path.display());
            }
            Err(e) => return Err(e),
        }
    }
    while cursor <= end {
        let Some((block, results)) = source.next_block(cursor, end)? else { break };
        debug_assert!(block.height >= cursor && block.height <= end);
        for tx in normalize(&block, &results, decoder, &mut stats.normalize)? {
            sink(tx);
        }
        stats.last_height = Some(block.height);
        if let Some(path) = &opts.checkpoint {
            write_checkpoint(path, block.height)?;
        }
        cursor = block.height + 1;
    }
    Ok(stats)
}
