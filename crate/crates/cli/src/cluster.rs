//! `latwar cluster`: connected components over the sender/contract
//! interaction graph. One searcher entity per component, named by its
//! lexicographically smallest member address.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::Args;
use latwar_core::arbdetect::ArbitrageRecord;
use latwar_core::failedarb::FailedArbRecord;
use latwar_core::ndjson::read_ndjson;
use latwar_core::searchers::{build_graph, connected_components};

use crate::meta::{write_json_pretty, RunMeta};
use crate::CmdResult;

#[derive(Args)]
pub(crate) struct ClusterArgs {
    /// Arbitrage records (arbs.ndjson)
    #[arg(long)]
    arbs: PathBuf,
    /// Also edge in failed attempts (reads --failed, or failed.ndjson next
    /// to --arbs)
    #[arg(long)]
    include_failed: bool,
    /// Failed-attempt records; only read with --include-failed
    #[arg(long)]
    failed: Option<PathBuf>,
    /// Contracts to drop from the graph, one address per line (shared
    /// routers glue unrelated searchers together)
    #[arg(long)]
    exclude_contracts: Option<PathBuf>,
    /// Output file (clusters.json); a .meta.json sidecar lands next to it
    #[arg(long)]
    out: PathBuf,
}

pub(crate) fn run(args: ClusterArgs) -> CmdResult {
    let arbs: Vec<ArbitrageRecord> = read_ndjson(&args.arbs)?;
    let failed: Option<Vec<FailedArbRecord>> = if args.include_failed {
        let path = args
            .failed
            .clone()
            .unwrap_or_else(|| args.arbs.with_file_name("failed.ndjson"));
        Some(read_ndjson(&path)?)
    } else {
        None
    };

    let mut excluded = BTreeSet::new();
    if let Some(path) = &args.exclude_contracts {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
        excluded.extend(raw.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }

    let graph = build_graph(&arbs, failed.as_deref(), &excluded);
    graph.check_bipartite()?;
    let clusters = connected_components(&graph);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        crate::meta::ensure_dir(dir)?;
    }
    write_json_pretty(&args.out, &clusters)?;

    RunMeta::new("cluster")
        .arg("arbs", args.arbs.display())
        .arg("include_failed", args.include_failed)
        .stat("arbs", arbs.len() as u64)
        .stat("failed", failed.as_ref().map_or(0, Vec::len) as u64)
        .stat("excluded_contracts", excluded.len() as u64)
        .stat("clusters", clusters.len() as u64)
        .write_to(&sidecar_meta_path(&args.out))?;
    log::info!("{} clusters from {} arbs", clusters.len(), arbs.len());
    Ok(())
}

/// clusters.json -> clusters.meta.json
fn sidecar_meta_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}.meta.json"))
}
