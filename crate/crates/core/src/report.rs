//! Static report emission.
//!
//! Everything the pipeline knows ends up as plain files: CSV tables, JSON
//! distribution data ready for plotting, the latency heat map, and one JSON
//! action table per arbitrage. A manifest with content hashes ties the
//! artifact together.
//!
//! Every emitted number is re-derived from the record files on each run, so
//! `verify_report` can render the whole report in memory and diff it against
//! what is on disk. The inputs themselves are embedded under `records/`,
//! which makes a report directory self-verifying. Nothing here writes
//! timestamps or absolute paths; equal inputs produce byte-identical
//! reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arbdetect::ArbitrageRecord;
use crate::failedarb::FailedArbRecord;
use crate::latency::{
    arrivals_csv_bytes, default_regions, distance_latency_correlation, first_seen, heatmap_csv,
    latency_deltas, median_matrix, read_arrivals_csv, read_regions_csv, regions_csv_bytes,
    ArrivalRecord, Delta, LatencyError, Region,
};
use crate::metrics::{
    block_failed_success_correlation, build_searcher_stats, correlation_suite, distributions,
    BlockStat, CorrelationResult, DistributionOptions, MetricsError, SearcherStats,
    DEFAULT_THRESHOLDS,
};
use crate::ndjson::{read_ndjson, NdjsonError};
use crate::searchers::{build_graph, connected_components, SearcherCluster};

/// Width of the latency-delta histogram bins.
const DELTA_BIN_MS: i64 = 25;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("output dir {path} not writable: {source}")]
    OutputDirNotWritable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {reason}")]
    BadInput { path: PathBuf, reason: String },

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error(transparent)]
    Latency(#[from] LatencyError),

    #[error(transparent)]
    Ndjson(#[from] NdjsonError),
}

/// Record files a report is derived from. Loaded from the conventional
/// layout written by the pipeline stages; anything absent is simply empty.
#[derive(Debug, Default)]
pub struct ReportInputs {
    pub arbs: Vec<ArbitrageRecord>,
    pub failed: Vec<FailedArbRecord>,
    /// From `clusters.json`. When absent, clusters are re-derived from the
    /// successful arbitrages only, matching the cluster stage's default.
    pub clusters: Option<Vec<SearcherCluster>>,
    pub blocks: Option<Vec<BlockStat>>,
    pub arrivals: Option<Vec<ArrivalRecord>>,
    pub regions: Vec<Region>,
}

impl ReportInputs {
    /// Reads `arbs.ndjson`, `failed.ndjson`, `block_stats.ndjson`,
    /// `clusters.json`, `arrivals.csv` and `regions.csv` from `dir`,
    /// tolerating absence of each. Regions fall back to the shipped table.
    /// A report's own `records/` directory uses this same layout.
    pub fn load(dir: &Path) -> Result<Self, ReportError> {
        let arbs_path = dir.join("arbs.ndjson");
        let failed_path = dir.join("failed.ndjson");
        let blocks_path = dir.join("block_stats.ndjson");
        let clusters_path = dir.join("clusters.json");
        let arrivals_path = dir.join("arrivals.csv");
        let regions_path = dir.join("regions.csv");

        let clusters = if clusters_path.exists() {
            let raw = fs::read_to_string(&clusters_path)
                .map_err(|e| ReportError::Io { path: clusters_path.clone(), source: e })?;
            Some(serde_json::from_str(&raw).map_err(|e| ReportError::BadInput {
                path: clusters_path,
                reason: e.to_string(),
            })?)
        } else {
            None
        };

        Ok(ReportInputs {
            arbs: if arbs_path.exists() { read_ndjson(&arbs_path)? } else { Vec::new() },
            failed: if failed_path.exists() { read_ndjson(&failed_path)? } else { Vec::new() },
            clusters,
            blocks: if blocks_path.exists() { Some(read_ndjson(&blocks_path)?) } else { None },
            arrivals: if arrivals_path.exists() {
                Some(read_arrivals_csv(&arrivals_path)?)
            } else {
                None
            },
            regions: if regions_path.exists() {
                read_regions_csv(&regions_path)?
            } else {
                default_regions()
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub checked: usize,
    pub missing: Vec<String>,
    pub mismatched: Vec<String>,
    pub extra: Vec<String>,
}

impl VerifyOutcome {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.mismatched.is_empty() && self.extra.is_empty()
    }
}

/// Renders and writes the full report, returning its manifest. All writes
/// are temp-and-rename; the manifest goes last so a torn run never leaves a
/// manifest describing files that aren't there.
pub fn emit_report(inputs: &ReportInputs, out_dir: &Path) -> Result<Manifest, ReportError> {
    fs::create_dir_all(out_dir).map_err(|e| ReportError::OutputDirNotWritable {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let files = render(inputs)?;
    let manifest = manifest_of(&files);
    for (rel, bytes) in &files {
        write_atomic(&out_dir.join(rel), bytes)?;
    }
    write_atomic(&out_dir.join("manifest.json"), &json_bytes(&manifest))?;
    Ok(manifest)
}

/// Re-derives the report from `inputs` and diffs it against `report_dir`,
/// byte for byte, including the manifest and any stray files.
pub fn verify_report(inputs: &ReportInputs, report_dir: &Path) -> Result<VerifyOutcome, ReportError> {
    let mut expected = render(inputs)?;
    let manifest = manifest_of(&expected);
    expected.insert("manifest.json".to_string(), json_bytes(&manifest));

    let mut outcome = VerifyOutcome::default();
    for (rel, bytes) in &expected {
        outcome.checked += 1;
        let path = report_dir.join(rel);
        match fs::read(&path) {
            Ok(on_disk) if on_disk == *bytes => {}
            Ok(_) => outcome.mismatched.push(rel.clone()),
            Err(e) if e.kind() == io::ErrorKind::NotFound => outcome.missing.push(rel.clone()),
            Err(e) => return Err(ReportError::Io { path, source: e }),
        }
    }

    let mut on_disk = Vec::new();
    walk(report_dir, Path::new(""), &mut on_disk)?;
    for rel in on_disk {
        if !expected.contains_key(&rel) {
            outcome.extra.push(rel);
        }
    }
    Ok(outcome)
}

type Files = BTreeMap<String, Vec<u8>>;

fn render(inputs: &ReportInputs) -> Result<Files, ReportError> {
    let mut files = Files::new();
    for (name, body) in SCHEMAS {
        files.insert(format!("schemas/{name}"), body.as_bytes().to_vec());
    }

    let arbs = &inputs.arbs;
    let failed = &inputs.failed;

    // The inputs are embedded under records/ so a report directory carries
    // everything `verify` needs to re-derive it. Absent inputs stay absent;
    // presence is part of what gets verified.
    if !arbs.is_empty() {
        files.insert("records/arbs.ndjson".into(), ndjson_bytes(arbs));
    }
    if !failed.is_empty() {
        files.insert("records/failed.ndjson".into(), ndjson_bytes(failed));
    }
    if let Some(blocks) = &inputs.blocks {
        files.insert("records/block_stats.ndjson".into(), ndjson_bytes(blocks));
    }
    if let Some(clusters) = &inputs.clusters {
        files.insert("records/clusters.json".into(), json_bytes(clusters));
    }
    if let Some(arrivals) = inputs.arrivals.as_deref() {
        files.insert("records/arrivals.csv".into(), arrivals_csv_bytes(arrivals));
        files.insert("records/regions.csv".into(), regions_csv_bytes(&inputs.regions));
    }

    if !arbs.is_empty() || !failed.is_empty() {
        let derived;
        let clusters: &[SearcherCluster] = match &inputs.clusters {
            Some(c) => c,
            None => {
                derived = connected_components(&build_graph(arbs, None, &BTreeSet::new()));
                &derived
            }
        };
        let stats = build_searcher_stats(arbs, failed, clusters)?;
        let block_corr = block_failed_success_correlation(arbs, failed).ok();

        files.insert(
            "tables/summary.csv".into(),
            summary_csv(inputs, clusters, &stats),
        );
        if !stats.is_empty() {
            files.insert("tables/searchers.csv".into(), searchers_csv(&stats));
            files.insert("tables/profits.csv".into(), profits_csv(&stats));
            files.insert(
                "tables/correlations.csv".into(),
                correlations_csv(&stats, block_corr.as_ref()),
            );
        }

        let dist = distributions(arbs, failed, inputs.blocks.as_deref(), DistributionOptions::default());
        if !arbs.is_empty() {
            files.insert("dist/arbs_per_block.json".into(), json_bytes(&dist.arbs_per_block));
            files.insert("dist/token_start.json".into(), json_bytes(&dist.token_start));
            files.insert("dist/amount_in.json".into(), json_bytes(&dist.amount_in));
            files.insert("dist/path_length.json".into(), json_bytes(&dist.path_length));
            files.insert("dist/pair_usage.json".into(), json_bytes(&dist.pair_usage));
            files.insert("dist/profit_rate.json".into(), json_bytes(&dist.profit_rate));
            files.insert("dist/top_senders.json".into(), json_bytes(&dist.top_senders));
            files.insert("dist/top_contracts.json".into(), json_bytes(&dist.top_contracts));
        }
        if let Some(volume) = &dist.block_volume {
            files.insert("dist/block_volume.json".into(), json_bytes(volume));
        }

        for arb in arbs {
            if !arb.tx_hash.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(ReportError::BadInput {
                    path: PathBuf::from("arbs.ndjson"),
                    reason: format!("tx hash {:?} is not a safe file name", arb.tx_hash),
                });
            }
            files.insert(format!("tx/{}.json", arb.tx_hash), json_bytes(arb));
        }
    }

    if let Some(arrivals) = inputs.arrivals.as_deref() {
        if !arrivals.is_empty() {
            let deltas = latency_deltas(arrivals);
            let matrix = median_matrix(&deltas);
            let seen = first_seen(arrivals);
            files.insert(
                "dist/first_seen_wins.json".into(),
                json_bytes(&FirstSeenWins {
                    n_txs: seen.per_tx.len() as u64,
                    ties: seen.ties,
                    wins_by_region: &seen.wins_by_region,
                }),
            );
            files.insert("dist/latency_delta_hist.json".into(), json_bytes(&delta_hist(&deltas)));
            files.insert("latency/heatmap.csv".into(), heatmap_csv(&matrix));
            match distance_latency_correlation(&matrix, &inputs.regions) {
                Ok(corr) => {
                    files.insert("latency/correlation.json".into(), json_bytes(&corr));
                }
                // Too few pairs for a correlation: the heat map stands alone.
                Err(LatencyError::Stats(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    Ok(files)
}

fn manifest_of(files: &Files) -> Manifest {
    Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        entries: files
            .iter()
            .map(|(path, bytes)| ManifestEntry {
                path: path.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            })
            .collect(),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

/// Same bytes `ndjson::write_ndjson` would produce for these records.
fn ndjson_bytes<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("report types serialize");
        out.push(b'\n');
    }
    out
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory csv");
    for row in rows {
        writer.write_record(&row).expect("in-memory csv");
    }
    writer.into_inner().expect("in-memory csv")
}

fn summary_csv(
    inputs: &ReportInputs,
    clusters: &[SearcherCluster],
    stats: &[SearcherStats],
) -> Vec<u8> {
    let arbs = &inputs.arbs;
    let failed = &inputs.failed;
    let senders: BTreeSet<&str> = arbs
        .iter()
        .map(|r| r.sender.as_str())
        .chain(failed.iter().map(|r| r.sender.as_str()))
        .collect();
    let contracts: BTreeSet<&str> = arbs
        .iter()
        .map(|r| r.contract.as_str())
        .chain(failed.iter().map(|r| r.contract.as_str()))
        .collect();
    let heights: BTreeSet<u64> = arbs
        .iter()
        .map(|r| r.height)
        .chain(failed.iter().map(|r| r.height))
        .collect();

    let mut rows = vec![
        vec!["n_arbs".to_string(), arbs.len().to_string()],
        vec!["n_failed_arbs".to_string(), failed.len().to_string()],
    ];
    if !arbs.is_empty() {
        rows.push(vec![
            "failed_to_success_ratio".to_string(),
            (failed.len() as f64 / arbs.len() as f64).to_string(),
        ]);
    }
    rows.push(vec!["n_searchers".to_string(), clusters.len().to_string()]);
    rows.push(vec!["n_senders".to_string(), senders.len().to_string()]);
    rows.push(vec!["n_contracts".to_string(), contracts.len().to_string()]);
    rows.push(vec!["n_blocks_with_activity".to_string(), heights.len().to_string()]);

    let mut totals: BTreeMap<&str, u128> = BTreeMap::new();
    for s in stats {
        for (token, profit) in &s.profit_by_token {
            *totals.entry(token).or_insert(0) += profit;
        }
    }
    for (token, profit) in totals {
        rows.push(vec![format!("total_profit_{token}"), profit.to_string()]);
    }
    if let Some(blocks) = &inputs.blocks {
        let txs: u64 = blocks.iter().map(|b| b.txs).sum();
        let reverted: u64 = blocks.iter().map(|b| b.reverted).sum();
        rows.push(vec!["n_blocks_scanned".to_string(), blocks.len().to_string()]);
        rows.push(vec!["total_txs".to_string(), txs.to_string()]);
        rows.push(vec!["total_reverted_txs".to_string(), reverted.to_string()]);
    }
    csv_bytes(&["metric", "value"], rows)
}

fn searchers_csv(stats: &[SearcherStats]) -> Vec<u8> {
    let rows = stats
        .iter()
        .map(|s| {
            vec![
                s.searcher_id.clone(),
                s.n_success.to_string(),
                s.n_failed.to_string(),
                s.success_rate.to_string(),
                s.n_contracts.to_string(),
                s.n_senders.to_string(),
                s.repeated_tx_rate.as_f64().to_string(),
                s.gas_success.to_string(),
                s.gas_failed.to_string(),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "searcher_id",
            "n_success",
            "n_failed",
            "success_rate",
            "n_contracts",
            "n_senders",
            "repeated_tx_rate",
            "gas_success",
            "gas_failed",
        ],
        rows,
    )
}

/// Long-form profit table: one row per (searcher, start token).
fn profits_csv(stats: &[SearcherStats]) -> Vec<u8> {
    let mut rows = Vec::new();
    for s in stats {
        for (token, profit) in &s.profit_by_token {
            rows.push(vec![s.searcher_id.clone(), token.clone(), profit.to_string()]);
        }
    }
    csv_bytes(&["searcher_id", "token", "profit"], rows)
}

fn correlations_csv(stats: &[SearcherStats], block: Option<&CorrelationResult>) -> Vec<u8> {
    let table = correlation_suite(stats, &DEFAULT_THRESHOLDS, None);
    let mut rows = Vec::new();
    let mut push = |scope: &str, threshold: String, pair: &str, r: Option<&CorrelationResult>| {
        if let Some(r) = r {
            rows.push(vec![
                scope.to_string(),
                threshold,
                table.profit_token.clone(),
                pair.to_string(),
                r.method.to_string(),
                r.rho.to_string(),
                r.p_value.to_string(),
                r.n.to_string(),
            ]);
        }
    };
    for row in &table.rows {
        let t = row.threshold.to_string();
        push("searcher", t.clone(), "success_rate_vs_profit", row.success_rate_vs_profit.as_ref());
        push("searcher", t.clone(), "repeated_rate_vs_profit", row.repeated_rate_vs_profit.as_ref());
        push("searcher", t.clone(), "profit_vs_n_success", row.profit_vs_n_success.as_ref());
        push("searcher", t.clone(), "n_contracts_vs_n_success", row.n_contracts_vs_n_success.as_ref());
        push("searcher", t, "n_senders_vs_n_success", row.n_senders_vs_n_success.as_ref());
    }
    if let Some(r) = block {
        rows.push(vec![
            "block".to_string(),
            String::new(),
            String::new(),
            "failed_vs_success_per_block".to_string(),
            r.method.to_string(),
            r.rho.to_string(),
            r.p_value.to_string(),
            r.n.to_string(),
        ]);
    }
    csv_bytes(
        &["scope", "threshold", "profit_token", "pair", "method", "rho", "p_value", "n"],
        rows,
    )
}

#[derive(Serialize)]
struct FirstSeenWins<'a> {
    n_txs: u64,
    ties: u64,
    wins_by_region: &'a BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct DeltaHist {
    bin_ms: i64,
    n_deltas: u64,
    bins: Vec<DeltaBin>,
}

#[derive(Serialize)]
struct DeltaBin {
    lo_ms: i64,
    count: u64,
}

fn delta_hist(deltas: &[Delta]) -> DeltaHist {
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for d in deltas {
        *counts.entry((d.delta_ms / DELTA_BIN_MS) * DELTA_BIN_MS).or_insert(0) += 1;
    }
    DeltaHist {
        bin_ms: DELTA_BIN_MS,
        n_deltas: deltas.len() as u64,
        bins: counts
            .into_iter()
            .map(|(lo_ms, count)| DeltaBin { lo_ms, count })
            .collect(),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    let not_writable = |source: io::Error| ReportError::OutputDirNotWritable {
        path: path.to_path_buf(),
        source,
    };
    let parent = path.parent().expect("report paths have parents");
    fs::create_dir_all(parent).map_err(not_writable)?;
    let name = path.file_name().expect("report paths have file names");
    let tmp = parent.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(not_writable)?;
    fs::rename(&tmp, path).map_err(not_writable)?;
    Ok(())
}

fn walk(root: &Path, rel: &Path, out: &mut Vec<String>) -> Result<(), ReportError> {
    let dir = root.join(rel);
    let entries = fs::read_dir(&dir).map_err(|e| ReportError::Io { path: dir, source: e })?;
    for entry in entries {
        let entry = entry.map_err(|e| ReportError::Io { path: root.join(rel), source: e })?;
        let sub = rel.join(entry.file_name());
        if entry
            .file_type()
            .map_err(|e| ReportError::Io { path: root.join(&sub), source: e })?
            .is_dir()
        {
            walk(root, &sub, out)?;
        } else {
            // manifest paths always use forward slashes
            out.push(
                sub.components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/"),
            );
        }
    }
    Ok(())
}

/// Column and shape documentation for every artifact, emitted with the data
/// so a report directory is self-describing.
const SCHEMAS: &[(&str, &str)] = &[
    (
        "manifest.schema.json",
        r#"{
  "file": "manifest.json",
  "format": "json",
  "description": "Every artifact in this report with its SHA-256 content hash. Paths are relative to the report root. The records/ entries are the input files every other artifact derives from; verification reloads them and re-renders.",
  "fields": {
    "version": "emitting package version",
    "entries": "[{path, sha256, bytes}] sorted by path"
  }
}
"#,
    ),
    (
        "tables.schema.json",
        r#"{
  "files": ["tables/summary.csv", "tables/searchers.csv", "tables/profits.csv", "tables/correlations.csv"],
  "format": "csv",
  "description": "Aggregate tables. All rates are plain ratios in [0,1]; profits are integer amounts in the token's smallest unit.",
  "columns": {
    "summary.csv": ["metric", "value"],
    "searchers.csv": ["searcher_id", "n_success", "n_failed", "success_rate", "n_contracts", "n_senders", "repeated_tx_rate", "gas_success", "gas_failed"],
    "profits.csv": ["searcher_id", "token", "profit"],
    "correlations.csv": ["scope", "threshold", "profit_token", "pair", "method", "rho", "p_value", "n"]
  },
  "notes": "correlations.csv: scope=searcher rows filter to searchers with n_success >= threshold; the scope=block row correlates per-block failed vs successful counts and leaves threshold empty."
}
"#,
    ),
    (
        "distributions.schema.json",
        r#"{
  "files": "dist/*.json",
  "format": "json",
  "description": "Plot-ready distribution data derived from the record files.",
  "shapes": {
    "arbs_per_block.json": "[{value, blocks}]: blocks that carried exactly `value` arbitrages",
    "block_volume.json": "{n_blocks, mean_txs, median_txs, p90_txs, max_txs} over scanned blocks",
    "token_start.json": "[{token, count, share}] by cycle start token",
    "amount_in.json": "{token: {count, p25, p50, p75, log10_hist}} of cycle input amounts",
    "path_length.json": "[{length, count, share}]",
    "pair_usage.json": "{n_pairs, total_uses, ranked: [{pair, uses, cumulative_share}], top10_coverage, top50_coverage, top100_coverage}",
    "profit_rate.json": "{bins: [{bin, count}], above_one} with 0.05-wide bins over [0,1]",
    "top_senders.json / top_contracts.json": "[{address, n_arbs, counterparties, share}]",
    "first_seen_wins.json": "{n_txs, ties, wins_by_region}",
    "latency_delta_hist.json": "{bin_ms, n_deltas, bins: [{lo_ms, count}]}"
  }
}
"#,
    ),
    (
        "latency.schema.json",
        r#"{
  "files": ["latency/heatmap.csv", "latency/correlation.json"],
  "description": "heatmap.csv columns: from_region (first to see the tx), to_region, median_ms (lower median of arrival deltas), samples. Diagonal rows are definitionally 0 with samples=0. correlation.json is the Pearson correlation of great-circle distance vs median latency over unordered region pairs: {rho, p_value, n, method}.",
  "format": "csv+json"
}
"#,
    ),
    (
        "tx.schema.json",
        r#"{
  "files": "tx/<tx_hash>.json",
  "format": "json",
  "description": "One file per detected arbitrage: the full record including the extracted action list.",
  "fields": {
    "tx_hash": "lowercase hex transaction hash",
    "height": "block height",
    "index_in_block": "position among the block's execute messages",
    "sender": "signer address",
    "contract": "entry contract address",
    "msg_hash": "sha256 of the canonicalized execute msg",
    "actions": "[{pair_address, token_in, amount_in, token_out, amount_out}] in execution order",
    "token_start": "cycle start/end token",
    "amount_in / amount_out / profit": "integer token amounts as strings",
    "path_length": "number of swaps in the cycle",
    "gas_used": "gas consumed"
  }
}
"#,
    ),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::haversine_km;
    use crate::ndjson::write_ndjson;

    fn arb(hash: &str, sender: &str, contract: &str, height: u64) -> ArbitrageRecord {
        ArbitrageRecord {
            tx_hash: hash.into(),
            height,
            index_in_block: 0,
            sender: sender.into(),
            contract: contract.into(),
            msg_hash: "aa11".into(),
            actions: Vec::new(),
            token_start: "uusd".into(),
            amount_in: 100,
            amount_out: 110,
            profit: 10,
            path_length: 2,
            gas_used: 500_000,
        }
    }

    fn model_arrivals(regions: &[Region]) -> Vec<ArrivalRecord> {
        let mut out = Vec::new();
        for (k, origin) in regions.iter().enumerate() {
            for r in regions {
                let delta = 5.0 + 0.02 * haversine_km(origin, r);
                out.push(ArrivalRecord {
                    tx_id: format!("tx-{k:03}"),
                    region: r.name.clone(),
                    t_ms: k as i64 * 10_000 + delta.round() as i64,
                });
            }
        }
        out
    }

    #[test]
    fn empty_inputs_emit_schemas_only() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = ReportInputs { regions: default_regions(), ..Default::default() };
        let manifest = emit_report(&inputs, dir.path()).unwrap();
        assert_eq!(manifest.entries.len(), SCHEMAS.len());
        assert!(manifest.entries.iter().all(|e| e.path.starts_with("schemas/")));
        assert!(dir.path().join("manifest.json").exists());
        assert!(verify_report(&inputs, dir.path()).unwrap().is_clean());
    }

    #[test]
    fn schema_files_are_valid_json() {
        for (name, body) in SCHEMAS {
            let parsed: Result<serde_json::Value, _> = serde_json::from_str(body);
            assert!(parsed.is_ok(), "{name} is not valid JSON");
        }
    }

    #[test]
    fn single_arb_report_round_trips_the_record() {
        let dir = tempfile::tempdir().unwrap();
        let record = arb("ff00", "sender1", "bot1", 7);
        let inputs = ReportInputs {
            arbs: vec![record.clone()],
            regions: default_regions(),
            ..Default::default()
        };
        emit_report(&inputs, dir.path()).unwrap();

        let raw = fs::read_to_string(dir.path().join("tx/ff00.json")).unwrap();
        let back: ArbitrageRecord = serde_json::from_str(&raw).unwrap();
        assert_eq!(back, record);

        for table in ["summary", "searchers", "profits", "correlations"] {
            assert!(dir.path().join(format!("tables/{table}.csv")).exists(), "{table}");
        }
        let summary = fs::read_to_string(dir.path().join("tables/summary.csv")).unwrap();
        assert!(summary.starts_with("metric,value\n"));
        assert!(summary.contains("total_profit_uusd,10"));
    }

    #[test]
    fn rerun_is_byte_identical() {
        let inputs = ReportInputs {
            arbs: vec![arb("aa", "s1", "c1", 1), arb("bb", "s2", "c2", 2)],
            arrivals: Some(model_arrivals(&default_regions()[..6])),
            regions: default_regions(),
            ..Default::default()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let man_a = emit_report(&inputs, dir_a.path()).unwrap();
        let man_b = emit_report(&inputs, dir_b.path()).unwrap();
        assert_eq!(man_a, man_b);
        assert_eq!(
            fs::read(dir_a.path().join("manifest.json")).unwrap(),
            fs::read(dir_b.path().join("manifest.json")).unwrap()
        );
    }

    #[test]
    fn latency_artifacts_emitted_from_arrivals() {
        let dir = tempfile::tempdir().unwrap();
        let regions = default_regions();
        let inputs = ReportInputs {
            arrivals: Some(model_arrivals(&regions[..6])),
            regions: regions.clone(),
            ..Default::default()
        };
        emit_report(&inputs, dir.path()).unwrap();

        let heatmap = fs::read_to_string(dir.path().join("latency/heatmap.csv")).unwrap();
        assert!(heatmap.starts_with("from_region,to_region,median_ms,samples\n"));
        let corr: CorrelationResult = serde_json::from_str(
            &fs::read_to_string(dir.path().join("latency/correlation.json")).unwrap(),
        )
        .unwrap();
        assert!(corr.rho > 0.99, "rho = {}", corr.rho);
        assert!(dir.path().join("dist/first_seen_wins.json").exists());
        assert!(dir.path().join("dist/latency_delta_hist.json").exists());
    }

    #[test]
    fn verify_flags_tampering_missing_and_extras() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = ReportInputs {
            arbs: vec![arb("aa", "s1", "c1", 1)],
            regions: default_regions(),
            ..Default::default()
        };
        emit_report(&inputs, dir.path()).unwrap();
        assert!(verify_report(&inputs, dir.path()).unwrap().is_clean());

        fs::write(dir.path().join("tables/summary.csv"), "metric,value\n").unwrap();
        fs::remove_file(dir.path().join("tx/aa.json")).unwrap();
        fs::write(dir.path().join("stray.txt"), "hello").unwrap();
        let outcome = verify_report(&inputs, dir.path()).unwrap();
        assert_eq!(outcome.mismatched, vec!["tables/summary.csv".to_string()]);
        assert_eq!(outcome.missing, vec!["tx/aa.json".to_string()]);
        assert_eq!(outcome.extra, vec!["stray.txt".to_string()]);

        // and a changed input shows up as a diff against the old report
        let mut edited = inputs;
        edited.arbs[0].profit = 11;
        edited.arbs[0].amount_out = 111;
        let outcome = verify_report(&edited, dir.path()).unwrap();
        assert!(!outcome.is_clean());
    }

    #[test]
    fn report_verifies_from_its_own_records() {
        let dir = tempfile::tempdir().unwrap();
        let regions = default_regions();
        let inputs = ReportInputs {
            arbs: vec![arb("aa", "s1", "c1", 1), arb("bb", "s1", "c1", 2)],
            blocks: Some(vec![BlockStat { height: 1, txs: 4, reverted: 1 }]),
            arrivals: Some(model_arrivals(&regions[..4])),
            regions,
            ..Default::default()
        };
        emit_report(&inputs, dir.path()).unwrap();

        // everything needed to re-derive the report travels with it
        let reloaded = ReportInputs::load(&dir.path().join("records")).unwrap();
        assert_eq!(reloaded.arbs, inputs.arbs);
        assert_eq!(reloaded.blocks, inputs.blocks);
        assert_eq!(reloaded.arrivals.as_ref().map(Vec::len), Some(16));
        assert!(verify_report(&reloaded, dir.path()).unwrap().is_clean());
    }

    #[test]
    fn load_reads_conventional_layout() {
        let dir = tempfile::tempdir().unwrap();
        write_ndjson(&dir.path().join("arbs.ndjson"), [arb("aa", "s1", "c1", 1)].iter()).unwrap();
        let clusters = vec![SearcherCluster {
            searcher_id: "c1".into(),
            senders: BTreeSet::from(["s1".into()]),
            contracts: BTreeSet::from(["c1".into()]),
        }];
        fs::write(
            dir.path().join("clusters.json"),
            serde_json::to_string(&clusters).unwrap(),
        )
        .unwrap();

        let inputs = ReportInputs::load(dir.path()).unwrap();
        assert_eq!(inputs.arbs.len(), 1);
        assert!(inputs.failed.is_empty());
        assert_eq!(inputs.clusters.as_deref(), Some(clusters.as_slice()));
        assert!(inputs.blocks.is_none());
        assert_eq!(inputs.regions.len(), 24);
    }
}
