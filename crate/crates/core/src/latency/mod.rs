//! Arrival-log analysis and latency-war simulation.
//!
//! Two halves sharing a geographic model:
//!
//! * `analyze`: reduce multi-region first-seen logs to per-region win
//!   counts, pairwise latency deltas, a median heat-map matrix, and the
//!   distance/latency correlation.
//! * `simulate`: a deterministic event loop where multi-instance bots race
//!   to back-run opportunities; first arrival at the validator wins, every
//!   other submission reverts.
//!
//! The simulator's exported arrival logs are valid analyzer input, so the
//! whole loop can be closed in tests without touching a real network.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::metrics::MetricsError;

mod analyze;
mod geo;
mod simulate;

pub use analyze::{
    apply_skew, distance_latency_correlation, first_seen, heatmap_csv, latency_deltas,
    median_matrix, read_arrivals_csv, read_offsets_csv, write_arrivals_csv, ArrivalRecord, Delta,
    FirstSeen, FirstSeenSummary, LatencyMatrix,
};
pub(crate) use analyze::arrivals_csv_bytes;
pub use geo::{
    default_regions, haversine_km, read_regions_csv, write_regions_csv, Region, EARTH_RADIUS_KM,
};
pub(crate) use geo::regions_csv_bytes;
pub use simulate::{
    export_arrivals, simulate, Attempt, LatencyModelCfg, OpportunityResult, OriginDist,
    SearcherCfg, SearcherOutcome, SimConfig, SimOutcome, ValidatorPlacement, EPOCH_MS,
    OPPORTUNITY_SPACING_MS,
};

/// Clock error the measurement setup is specified to stay within. Offsets
/// larger than this are accepted but almost certainly indicate a bad file.
pub const MAX_EXPECTED_SKEW_MS: i64 = 15;

#[derive(Debug, Error)]
pub enum LatencyError {
    #[error("region {name:?}: {reason}")]
    InvalidRegion { name: String, reason: String },

    #[error("config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("duplicate arrival for tx {tx_id:?} in region {region:?}")]
    DuplicateArrival { tx_id: String, region: String },

    #[error("region {name:?} has no coordinates in the region table")]
    UnknownRegion { name: String },

    #[error("{path}:{line}: {reason}")]
    BadRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Stats(#[from] MetricsError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl LatencyError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LatencyError::Io {
            path: path.into(),
            source,
        }
    }
}
