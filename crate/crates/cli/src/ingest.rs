//! `latwar ingest`: pull a block range into `txs.ndjson`, one normalized
//! execute message per line.
//!
//! Checkpointing is managed here rather than inside the range iterator so
//! the ordering is right: the output writer is flushed before the
//! checkpoint advances, meaning the checkpoint never claims a block whose
//! txs could still be lost in a buffer. The reverse gap (txs on disk past
//! the checkpoint after a crash) is closed on resume by scanning the
//! existing file tail and skipping what is already durable.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;
use latwar_core::ingest::{
    iterate_range, read_checkpoint, write_checkpoint, BlockSource, FixtureJsonDecoder,
    FixtureReader, IterateOptions, NormalizedTx, RangeStats, RpcClient,
};
use serde::Deserialize;

use crate::meta::{ensure_dir, RunMeta};
use crate::CmdResult;

#[derive(Args)]
#[command(group(
    clap::ArgGroup::new("source").required(true).args(["endpoint", "fixtures"])
))]
pub(crate) struct IngestArgs {
    /// Tendermint RPC base URL (e.g. http://localhost:26657)
    #[arg(long)]
    endpoint: Option<String>,
    /// Directory of NDJSON block fixtures
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// First height, inclusive
    #[arg(long)]
    from: u64,
    /// Last height, inclusive
    #[arg(long)]
    to: u64,
    /// Checkpoint file for resumable runs; without it the output is
    /// truncated and rewritten
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Output directory (txs.ndjson, meta.json)
    #[arg(long)]
    out: PathBuf,
}

pub(crate) fn run(args: IngestArgs) -> CmdResult {
    if args.from > args.to {
        return Err(crate::usage(format!("--from {} exceeds --to {}", args.from, args.to)));
    }
    ensure_dir(&args.out)?;
    let txs_path = args.out.join("txs.ndjson");

    let mut start = args.from;
    if let Some(cp_path) = &args.checkpoint {
        if let Some(cp) = read_checkpoint(cp_path)? {
            start = start.max(cp.last_height + 1);
            log::info!("checkpoint at {}, resuming from {start}", cp.last_height);
        }
    }

    // With a checkpoint the output is append-only; anything already written
    // (including blocks past the checkpoint) is detected and not rewritten.
    let (writer, tail) = if args.checkpoint.is_some() {
        open_resumable(&txs_path)?
    } else {
        (BufWriter::new(File::create(&txs_path).with_context(|| txs_path.display().to_string())?), None)
    };

    let outcome = match (&args.endpoint, &args.fixtures) {
        (Some(url), None) => {
            let client = RpcClient::new(url)?;
            pump(client, start, &args, writer, tail)?
        }
        (None, Some(dir)) => pump(FixtureReader::open(dir)?, start, &args, writer, tail)?,
        _ => unreachable!("clap group enforces exactly one source"),
    };

    let mut meta = RunMeta::new("ingest")
        .arg("from", args.from)
        .arg("to", args.to)
        .arg(
            "source",
            args.endpoint
                .as_deref()
                .map(str::to_string)
                .unwrap_or_else(|| args.fixtures.as_ref().unwrap().display().to_string()),
        )
        .stat("blocks", outcome.stats.normalize.blocks)
        .stat("txs_seen", outcome.stats.normalize.txs_seen)
        .stat("messages", outcome.stats.normalize.messages)
        .stat("non_execute", outcome.stats.normalize.non_execute)
        .stat("decode_errors", outcome.stats.normalize.decode_errors)
        .stat("written", outcome.written)
        .stat("skipped_existing", outcome.skipped);
    if let Some(h) = outcome.stats.last_height {
        meta = meta.stat("last_height", h);
    }
    meta.write(&args.out)?;
    log::info!(
        "ingested {} messages from {} blocks into {}",
        outcome.written,
        outcome.stats.normalize.blocks,
        txs_path.display()
    );
    Ok(())
}

struct Outcome {
    stats: RangeStats,
    written: u64,
    skipped: u64,
}

fn pump<S: BlockSource>(
    source: S,
    start: u64,
    args: &IngestArgs,
    mut writer: BufWriter<File>,
    tail: Option<Tail>,
) -> Result<Outcome, crate::CliError> {
    let mut written: u64 = 0;
    let mut skipped: u64 = 0;
    let mut sink_err: Option<anyhow::Error> = None;
    let mut cur_block: Option<u64> = None;

    let stats = {
        let sink = |tx: NormalizedTx| {
            if sink_err.is_some() {
                return;
            }
            // Checkpoint the previous block once the first tx of the next
            // one shows up: by then every tx of the previous block has been
            // handed to the writer, and the flush below makes it durable.
            if let (Some(prev), Some(cp_path)) = (cur_block, &args.checkpoint) {
                if tx.height != prev {
                    if let Err(e) = flush_and_checkpoint(&mut writer, cp_path, prev) {
                        sink_err = Some(e);
                        return;
                    }
                }
            }
            cur_block = Some(tx.height);
            if let Some(t) = &tail {
                if tx.height < t.height || (tx.height == t.height && t.indexes.contains(&tx.index_in_block)) {
                    skipped += 1;
                    return;
                }
            }
            if let Err(e) = write_line(&mut writer, &tx) {
                sink_err = Some(e);
                return;
            }
            written += 1;
        };
        iterate_range(source, start, args.to, &FixtureJsonDecoder, &IterateOptions::default(), sink)?
    };
    if let Some(e) = sink_err {
        return Err(e.into());
    }
    writer.flush().context("flushing txs.ndjson")?;
    // Final checkpoint comes from the range stats so trailing empty blocks
    // still advance it.
    if let (Some(cp_path), Some(last)) = (&args.checkpoint, stats.last_height) {
        write_checkpoint(cp_path, last)?;
    }
    Ok(Outcome { stats, written, skipped })
}

fn write_line(writer: &mut BufWriter<File>, tx: &NormalizedTx) -> anyhow::Result<()> {
    serde_json::to_writer(&mut *writer, tx)?;
    writer.write_all(b"\n")?;
    Ok(())
}

fn flush_and_checkpoint(
    writer: &mut BufWriter<File>,
    cp_path: &Path,
    height: u64,
) -> anyhow::Result<()> {
    writer.flush().context("flushing txs.ndjson")?;
    write_checkpoint(cp_path, height)?;
    Ok(())
}

/// What the existing output already holds at its end: the highest block and
/// the message indexes present for it. Earlier blocks are complete by
/// construction (writes are sequential and ascending).
struct Tail {
    height: u64,
    indexes: BTreeSet<u32>,
}

/// Open for append, validating the existing content line by line. A torn
/// final line (no trailing newline or unparseable, from a crashed run) is
/// truncated away; damage anywhere else is refused.
fn open_resumable(path: &Path) -> anyhow::Result<(BufWriter<File>, Option<Tail>)> {
    if !path.exists() {
        let f = File::create(path).with_context(|| path.display().to_string())?;
        return Ok((BufWriter::new(f), None));
    }
    #[derive(Deserialize)]
    struct Line {
        height: u64,
        index_in_block: u32,
    }
    let mut reader =
        BufReader::new(File::open(path).with_context(|| path.display().to_string())?);
    let mut line = String::new();
    let mut offset: u64 = 0;
    let mut valid_len: u64 = 0;
    let mut tail: Option<Tail> = None;
    loop {
        line.clear();
        let n = reader.read_line(&mut line).with_context(|| path.display().to_string())?;
        if n == 0 {
            break;
        }
        offset += n as u64;
        let complete = line.ends_with('\n');
        match serde_json::from_str::<Line>(line.trim_end()) {
            Ok(l) if complete => {
                match &mut tail {
                    Some(t) if t.height == l.height => {
                        t.indexes.insert(l.index_in_block);
                    }
                    _ => {
                        tail = Some(Tail {
                            height: l.height,
                            indexes: BTreeSet::from([l.index_in_block]),
                        });
                    }
                }
                valid_len = offset;
            }
            _ if offset == file_len(&reader)? => {
                log::warn!("dropping torn final line in {}", path.display());
                break;
            }
            Ok(_) => bail!("{}: unterminated line mid-file", path.display()),
            Err(e) => bail!("{}: corrupt line before the tail: {e}", path.display()),
        }
    }
    let mut f = OpenOptions::new()
        .write(true)
        .open(path)
        .with_context(|| path.display().to_string())?;
    f.set_len(valid_len).context("truncating torn tail")?;
    f.seek(SeekFrom::End(0)).map_err(|e| anyhow!("seeking {}: {e}", path.display()))?;
    Ok((BufWriter::new(f), tail))
}

fn file_len(reader: &BufReader<File>) -> anyhow::Result<u64> {
    Ok(reader.get_ref().metadata()?.len())
}
