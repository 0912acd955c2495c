//! `latwar detect`: the two-pass classification.
//!
//! Pass one walks every executed tx through the matchers and the cycle
//! test, building the success-side signatures as arbitrages come out. Pass
//! two replays the reverted txs against those signatures. Running the
//! passes strictly in order means a reverted tx early in the range is
//! still judged against arbitrages found later, which is the point: the
//! heuristic is retrospective, not causal.

use std::path::PathBuf;

use clap::Args;
use latwar_core::arbdetect::{classify, Classification};
use latwar_core::failedarb::{is_failed_arbitrage, MatchMode, SearcherSignatures};
use latwar_core::ingest::NormalizedTx;
use latwar_core::logparse::MatcherRegistry;
use latwar_core::metrics::BlockStat;
use latwar_core::ndjson::{read_ndjson, write_ndjson};

use crate::meta::{ensure_dir, write_json_pretty, RunMeta};
use crate::CmdResult;

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    /// Flag a reverted tx when any condition matches
    AnyOf,
    /// Require sender, contract and message shape to all match
    AllOf,
}

impl From<Mode> for MatchMode {
    fn from(m: Mode) -> MatchMode {
        match m {
            Mode::AnyOf => MatchMode::AnyOf,
            Mode::AllOf => MatchMode::AllOf,
        }
    }
}

#[derive(Args)]
pub(crate) struct DetectArgs {
    /// Ingest output directory (reads txs.ndjson)
    #[arg(long = "in")]
    input: PathBuf,
    /// Matcher config file (JSON or TOML listing matcher names)
    #[arg(long)]
    matchers: Option<PathBuf>,
    /// Failed-attempt match mode
    #[arg(long, value_enum, default_value = "any-of")]
    mode: Mode,
    /// Output directory (arbs.ndjson, failed.ndjson, block_stats.ndjson,
    /// signatures.json, meta.json)
    #[arg(long)]
    out: PathBuf,
}

pub(crate) fn run(args: DetectArgs) -> CmdResult {
    let registry = match &args.matchers {
        Some(path) => MatcherRegistry::from_config_file(path)?,
        None => MatcherRegistry::default(),
    };
    let txs_path = args.input.join("txs.ndjson");
    let txs: Vec<NormalizedTx> = read_ndjson(&txs_path)?;
    ensure_dir(&args.out)?;

    let mut arbs = Vec::new();
    let mut reverted: Vec<&NormalizedTx> = Vec::new();
    let mut sigs = SearcherSignatures::new();
    let mut per_block: std::collections::BTreeMap<u64, (u64, u64)> = Default::default();
    let mut non_arb: u64 = 0;
    let mut unmatched_runs: u64 = 0;

    for tx in &txs {
        let block = per_block.entry(tx.height).or_default();
        block.0 += 1;
        let classified = classify(tx, &registry);
        if let Some(e) = &classified.extraction {
            unmatched_runs += u64::from(e.unmatched_runs);
            for w in &e.warnings {
                log::debug!("{}: {w}", tx.tx_hash);
            }
        }
        match classified.outcome {
            Classification::Success(record) => {
                sigs.insert(&record, &tx.execute_msg);
                arbs.push(*record);
            }
            Classification::NonArb => non_arb += 1,
            Classification::Reverted => {
                block.1 += 1;
                reverted.push(tx);
            }
        }
    }
    let blocks: Vec<BlockStat> = per_block
        .into_iter()
        .map(|(height, (txs, reverted))| BlockStat { height, txs, reverted })
        .collect();

    let mode: MatchMode = args.mode.into();
    let mut failed = Vec::new();
    for tx in reverted {
        if let Some(record) = is_failed_arbitrage(tx, &sigs, mode)? {
            failed.push(record);
        }
    }

    let n_reverted = txs.iter().filter(|t| t.code != 0).count() as u64;
    write_ndjson(&args.out.join("arbs.ndjson"), &arbs)?;
    write_ndjson(&args.out.join("failed.ndjson"), &failed)?;
    write_ndjson(&args.out.join("block_stats.ndjson"), &blocks)?;
    write_json_pretty(&args.out.join("signatures.json"), &sigs)?;

    let mut meta = RunMeta::new("detect")
        .arg("in", args.input.display())
        .arg("mode", match args.mode {
            Mode::AnyOf => "any-of",
            Mode::AllOf => "all-of",
        })
        .stat("txs", txs.len() as u64)
        .stat("blocks", blocks.len() as u64)
        .stat("arbs", arbs.len() as u64)
        .stat("non_arb", non_arb)
        .stat("reverted", n_reverted)
        .stat("failed_flagged", failed.len() as u64)
        .stat("unmatched_runs", unmatched_runs);
    if let Some(path) = &args.matchers {
        meta = meta.config_file(path)?;
    }
    meta.write(&args.out)?;
    log::info!(
        "{} arbs, {} flagged of {} reverted, {} txs",
        arbs.len(),
        failed.len(),
        n_reverted,
        txs.len()
    );
    Ok(())
}
