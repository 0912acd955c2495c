//! `latwar metrics`: per-searcher stats, the threshold correlation table,
//! and the descriptive distributions.

use std::path::PathBuf;

use clap::Args;
use latwar_core::arbdetect::ArbitrageRecord;
use latwar_core::failedarb::FailedArbRecord;
use latwar_core::metrics::{
    block_failed_success_correlation, build_searcher_stats, correlation_suite, distributions,
    BlockStat, CorrelationResult, CorrelationTable, DistributionOptions, MetricsError,
    DEFAULT_THRESHOLDS,
};
use latwar_core::ndjson::{read_ndjson, write_ndjson};
use latwar_core::searchers::SearcherCluster;
use serde::Serialize;

use crate::meta::{ensure_dir, write_json_pretty, RunMeta};
use crate::CmdResult;

#[derive(Args)]
pub(crate) struct MetricsArgs {
    /// Arbitrage records (arbs.ndjson)
    #[arg(long)]
    arbs: PathBuf,
    /// Failed-attempt records (failed.ndjson)
    #[arg(long)]
    failed: PathBuf,
    /// Cluster table (clusters.json)
    #[arg(long)]
    clusters: PathBuf,
    /// Per-block counts for volume distributions (block_stats.ndjson)
    #[arg(long)]
    blocks: Option<PathBuf>,
    /// Minimum-success thresholds for the correlation table
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS)]
    thresholds: Vec<u64>,
    /// Start token whose profit enters the correlations (default: largest
    /// aggregate)
    #[arg(long)]
    profit_token: Option<String>,
    /// Keep profit rates above 1.0 in the histogram
    #[arg(long)]
    include_profit_rate_outliers: bool,
    /// Output directory (stats.ndjson, correlations.json,
    /// distributions.json, meta.json)
    #[arg(long)]
    out: PathBuf,
}

/// The correlations artifact: the searcher threshold table plus the
/// block-level failure/success relation. The latter is null when the range
/// is too uniform to correlate (constant counts, under two blocks).
#[derive(Serialize)]
struct Correlations {
    searcher_thresholds: CorrelationTable,
    block_failed_vs_success: Option<CorrelationResult>,
}

pub(crate) fn run(args: MetricsArgs) -> CmdResult {
    let arbs: Vec<ArbitrageRecord> = read_ndjson(&args.arbs)?;
    let failed: Vec<FailedArbRecord> = read_ndjson(&args.failed)?;
    let clusters: Vec<SearcherCluster> = {
        let raw = std::fs::read_to_string(&args.clusters)
            .map_err(|e| anyhow::anyhow!("reading {}: {e}", args.clusters.display()))?;
        serde_json::from_str(&raw)
            .map_err(|e| anyhow::anyhow!("parsing {}: {e}", args.clusters.display()))?
    };
    let blocks: Option<Vec<BlockStat>> =
        args.blocks.as_ref().map(|p| read_ndjson(p)).transpose()?;

    ensure_dir(&args.out)?;
    let stats = build_searcher_stats(&arbs, &failed, &clusters)?;
    let table = correlation_suite(&stats, &args.thresholds, args.profit_token.as_deref());
    let block_corr = match block_failed_success_correlation(&arbs, &failed) {
        Ok(r) => Some(r),
        Err(MetricsError::DegenerateInput { reason }) => {
            log::warn!("block failed/success correlation skipped: {reason}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let dist = distributions(
        &arbs,
        &failed,
        blocks.as_deref(),
        DistributionOptions { include_profit_rate_outliers: args.include_profit_rate_outliers },
    );

    write_ndjson(&args.out.join("stats.ndjson"), &stats)?;
    write_json_pretty(
        &args.out.join("correlations.json"),
        &Correlations { searcher_thresholds: table, block_failed_vs_success: block_corr },
    )?;
    write_json_pretty(&args.out.join("distributions.json"), &dist)?;

    RunMeta::new("metrics")
        .arg("arbs", args.arbs.display())
        .arg("failed", args.failed.display())
        .arg("clusters", args.clusters.display())
        .arg(
            "thresholds",
            args.thresholds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        )
        .stat("arbs", arbs.len() as u64)
        .stat("failed", failed.len() as u64)
        .stat("searchers", stats.len() as u64)
        .write(&args.out)?;
    log::info!("{} searchers from {} arbs, {} failed", stats.len(), arbs.len(), failed.len());
    Ok(())
}
