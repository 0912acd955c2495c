//! latwar: cyclic-arbitrage detection and latency-war analysis.
//!
//! Subcommands mirror the pipeline stages: ingest blocks, detect
//! arbitrages and failed attempts, cluster searchers, compute metrics,
//! analyze or simulate propagation latency, render the report. Everything
//! is file-in, file-out and deterministic; `gen-corpus` produces synthetic
//! chains with known ground truth for end-to-end checks.

mod cluster;
mod detect;
mod gen_corpus;
mod ingest;
mod latency;
mod meta;
mod metrics;
mod report;

use clap::{Parser, Subcommand};

/// Runtime failures exit 1; malformed invocations exit 2 (matching clap's
/// own parse errors).
pub(crate) enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) type CmdResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "latwar",
    version,
    about = "Cyclic-arbitrage detection and latency-war analysis for fixed-gas-price chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pull a block range from a node or fixture directory into normalized txs
    Ingest(ingest::IngestArgs),
    /// Classify txs into arbitrages, failed attempts and block stats
    Detect(detect::DetectArgs),
    /// Group senders and contracts into searchers
    Cluster(cluster::ClusterArgs),
    /// Per-searcher stats, the threshold correlation table, distributions
    Metrics(metrics::MetricsArgs),
    /// Arrival-log analysis and the propagation simulator
    #[command(subcommand)]
    Latency(latency::LatencyCmd),
    /// Render the static report, or verify an existing one
    Report(report::ReportArgs),
    /// Generate a synthetic corpus with known ground truth
    GenCorpus(gen_corpus::GenCorpusArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LATWAR_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => ingest::run(args),
        Command::Detect(args) => detect::run(args),
        Command::Cluster(args) => cluster::run(args),
        Command::Metrics(args) => metrics::run(args),
        Command::Latency(cmd) => latency::run(cmd),
        Command::Report(args) => report::run(args),
        Command::GenCorpus(args) => gen_corpus::run(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
