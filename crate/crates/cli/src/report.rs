//! `latwar report`: render the static report from pipeline records, or
//! re-derive an existing report from its embedded `records/` copy and diff
//! it byte for byte.
//!
//! The report directory gets no `meta.json`: every file in it is listed in
//! `manifest.json`, and verification treats anything unlisted as a defect.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use latwar_core::report::{emit_report, verify_report, ReportInputs};

use crate::{usage, CmdResult};

#[derive(Args)]
pub(crate) struct ReportArgs {
    #[command(subcommand)]
    sub: Option<ReportSub>,
    /// Records directory (arbs.ndjson, failed.ndjson, block_stats.ndjson,
    /// clusters.json, arrivals.csv, regions.csv; all optional)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Report output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReportSub {
    /// Check a report against its own records/ directory
    Verify {
        /// Report directory (must contain manifest.json and records/)
        #[arg(long = "in")]
        input: PathBuf,
    },
}

pub(crate) fn run(args: ReportArgs) -> CmdResult {
    match args.sub {
        Some(ReportSub::Verify { input }) => verify(input),
        None => {
            let input = args.input.ok_or_else(|| usage("--in is required"))?;
            let out = args.out.ok_or_else(|| usage("--out is required"))?;
            let inputs = ReportInputs::load(&input)?;
            let manifest = emit_report(&inputs, &out)?;
            println!("{} files -> {}", manifest.entries.len() + 1, out.display());
            Ok(())
        }
    }
}

fn verify(report_dir: PathBuf) -> CmdResult {
    let inputs = ReportInputs::load(&report_dir.join("records"))?;
    let outcome = verify_report(&inputs, &report_dir)?;
    if outcome.is_clean() {
        println!("ok: {} files verified", outcome.checked);
        return Ok(());
    }
    for rel in &outcome.missing {
        println!("missing: {rel}");
    }
    for rel in &outcome.mismatched {
        println!("mismatched: {rel}");
    }
    for rel in &outcome.extra {
        println!("extra: {rel}");
    }
    Err(anyhow::anyhow!(
        "report diverges: {} missing, {} mismatched, {} extra",
        outcome.missing.len(),
        outcome.mismatched.len(),
        outcome.extra.len()
    )
    .into())
}
