//! Core library for the `latwar` toolkit: ingestion of CosmWasm blocks,
//! extraction of swap actions from execution logs, cyclic-arbitrage
//! detection, failed-attempt flagging, searcher clustering, summary
//! statistics and network-latency analysis/simulation.
//!
//! Everything that touches token amounts works on `u128` micro-denomination
//! integers or exact rationals; floating point is confined to the
//! correlation statistics and the latency model.

pub mod arbdetect;
pub mod failedarb;
pub mod ingest;
pub mod latency;
pub mod logparse;
pub mod metrics;
pub mod ndjson;
pub mod report;
pub mod searchers;

mod serde_util;

pub use arbdetect::{is_arbitrage, ArbitrageRecord, Classification, CycleSummary};
pub use failedarb::{FailedArbRecord, MatchMode, SearcherSignatures};
pub use ingest::{LogEvent, NormalizedTx, RawBlock, TxResult};
pub use latency::{Region, SimConfig, SimOutcome};
pub use logparse::{Action, MatcherRegistry};
pub use metrics::SearcherStats;
pub use report::{emit_report, verify_report, Manifest, ReportInputs};
pub use searchers::{InteractionGraph, SearcherCluster};
