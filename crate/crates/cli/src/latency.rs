//! `latwar latency`: the measurement side (analyze) and the model side
//! (simulate). Simulated arrival exports feed straight back into analyze,
//! which is how the whole loop gets checked end to end.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use latwar_core::latency::{
    apply_skew, default_regions, distance_latency_correlation, export_arrivals, first_seen,
    heatmap_csv, latency_deltas, median_matrix, read_arrivals_csv, read_offsets_csv,
    read_regions_csv, simulate, write_arrivals_csv, LatencyError, SimConfig,
};
use latwar_core::metrics::MetricsError;
use latwar_core::ndjson::write_ndjson;
use serde::Serialize;

use crate::meta::{ensure_dir, write_json_pretty, RunMeta};
use crate::CmdResult;

#[derive(Subcommand)]
pub(crate) enum LatencyCmd {
    /// Reduce a multi-region arrival log to wins, deltas and the
    /// distance/latency correlation
    Analyze(AnalyzeArgs),
    /// Run the latency-war simulator from a config profile
    Simulate(SimulateArgs),
}

#[derive(Args)]
pub(crate) struct AnalyzeArgs {
    /// Arrival log (csv: tx_id, region, t_ms)
    #[arg(long)]
    arrivals: PathBuf,
    /// Region coordinate table (csv: name, lat, lon); defaults to the
    /// shipped table
    #[arg(long)]
    regions: Option<PathBuf>,
    /// Per-region clock offsets to subtract before reduction (csv: region,
    /// offset_ms)
    #[arg(long)]
    offsets: Option<PathBuf>,
    /// Output directory (first_seen.json, heatmap.csv, correlation.json,
    /// meta.json)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub(crate) struct SimulateArgs {
    /// Simulation profile (JSON or TOML). An empty `regions` list means
    /// the shipped region table
    #[arg(long)]
    config: PathBuf,
    /// Output directory (outcome.json, opportunities.ndjson, meta.json)
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-region arrival log, analyzer-ready
    #[arg(long)]
    export_arrivals: Option<PathBuf>,
}

pub(crate) fn run(cmd: LatencyCmd) -> CmdResult {
    match cmd {
        LatencyCmd::Analyze(args) => analyze(args),
        LatencyCmd::Simulate(args) => simulate_cmd(args),
    }
}

fn analyze(args: AnalyzeArgs) -> CmdResult {
    let mut arrivals = read_arrivals_csv(&args.arrivals)?;
    let regions = match &args.regions {
        Some(path) => read_regions_csv(path)?,
        None => default_regions(),
    };
    if let Some(path) = &args.offsets {
        let offsets = read_offsets_csv(path)?;
        apply_skew(&mut arrivals, &offsets);
    }

    ensure_dir(&args.out)?;
    let summary = first_seen(&arrivals);
    let deltas = latency_deltas(&arrivals);
    let matrix = median_matrix(&deltas);
    let correlation = match distance_latency_correlation(&matrix, &regions) {
        Ok(r) => Some(r),
        Err(LatencyError::Stats(MetricsError::DegenerateInput { reason })) => {
            log::warn!("distance/latency correlation skipped: {reason}");
            None
        }
        Err(e) => return Err(e.into()),
    };

    write_json_pretty(&args.out.join("first_seen.json"), &summary)?;
    std::fs::write(args.out.join("heatmap.csv"), heatmap_csv(&matrix))
        .map_err(|e| anyhow::anyhow!("writing heatmap.csv: {e}"))?;
    write_json_pretty(&args.out.join("correlation.json"), &correlation)?;

    RunMeta::new("latency analyze")
        .arg("arrivals", args.arrivals.display())
        .stat("arrivals", arrivals.len() as u64)
        .stat("txs", summary.per_tx.len() as u64)
        .stat("ties", summary.ties)
        .stat("deltas", deltas.len() as u64)
        .write(&args.out)?;
    log::info!("{} txs over {} regions", summary.per_tx.len(), matrix.regions.len());
    Ok(())
}

/// outcome.json: everything except the per-opportunity trace, which goes
/// to opportunities.ndjson so the summary stays readable.
#[derive(Serialize)]
struct OutcomeSummary<'a> {
    seed: u64,
    n_opportunities: u64,
    ties_broken: u64,
    searchers: &'a [latwar_core::latency::SearcherOutcome],
}

fn simulate_cmd(args: SimulateArgs) -> CmdResult {
    let mut cfg = read_sim_config(&args.config)?;
    if cfg.regions.is_empty() {
        cfg.regions = default_regions();
    }
    let outcome = simulate(&cfg)?;

    ensure_dir(&args.out)?;
    write_json_pretty(
        &args.out.join("outcome.json"),
        &OutcomeSummary {
            seed: outcome.seed,
            n_opportunities: outcome.opportunities.len() as u64,
            ties_broken: outcome.ties_broken,
            searchers: &outcome.searchers,
        },
    )?;
    write_ndjson(&args.out.join("opportunities.ndjson"), &outcome.opportunities)?;
    if let Some(path) = &args.export_arrivals {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            ensure_dir(dir)?;
        }
        write_arrivals_csv(path, &export_arrivals(&outcome))?;
    }

    RunMeta::new("latency simulate")
        .seed(cfg.seed)
        .config_file(&args.config)?
        .stat("opportunities", outcome.opportunities.len() as u64)
        .stat("searchers", outcome.searchers.len() as u64)
        .stat("ties_broken", outcome.ties_broken)
        .write(&args.out)?;
    log::info!(
        "{} opportunities, {} searchers, {} ties broken",
        outcome.opportunities.len(),
        outcome.searchers.len(),
        outcome.ties_broken
    );
    Ok(())
}

/// `SimConfig::from_file` validates eagerly, which would reject the empty
/// `regions` sentinel before it can be filled in. Parse here, validate in
/// `simulate`.
fn read_sim_config(path: &PathBuf) -> Result<SimConfig, crate::CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    let cfg: SimConfig = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&raw).map_err(|e| anyhow::anyhow!("parsing {}: {e}", path.display()))?
    } else {
        serde_json::from_str(&raw)
            .map_err(|e| anyhow::anyhow!("parsing {}: {e}", path.display()))?
    };
    Ok(cfg)
}
