//! First-seen arrival log reductions.
//!
//! Input is a flat log of (tx_id, region, t_ms) rows from the measurement
//! network (or the simulator). Everything downstream is a pure fold: the
//! first-seen table, per-pair latency deltas, the median heat map, and the
//! distance correlation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geo::{haversine_km, Region};
use super::LatencyError;
use crate::metrics::correlation::{pearson, CorrelationResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalRecord {
    pub tx_id: String,
    pub region: String,
    pub t_ms: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstSeen {
    pub region: String,
    pub t_ms: i64,
}

/// Result of the first-seen reduction. `ties` counts records that shared a
/// winning timestamp but lost on the region-name rule, so a three-way tie
/// contributes two.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FirstSeenSummary {
    pub per_tx: BTreeMap<String, FirstSeen>,
    pub wins_by_region: BTreeMap<String, u64>,
    pub ties: u64,
}

/// One non-first arrival, measured from the first-seen time of its tx.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delta {
    pub first_region: String,
    pub region: String,
    pub delta_ms: i64,
}

/// Ordered-pair medians: `medians[first][other]`. Diagonal entries are 0 by
/// definition and carry no sample count; off-diagonal entries exist only
/// where at least one delta was observed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LatencyMatrix {
    pub regions: Vec<String>,
    pub medians: BTreeMap<String, BTreeMap<String, i64>>,
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl LatencyMatrix {
    pub fn median(&self, from: &str, to: &str) -> Option<i64> {
        self.medians.get(from)?.get(to).copied()
    }

    pub fn count(&self, from: &str, to: &str) -> u64 {
        self.counts
            .get(from)
            .and_then(|row| row.get(to))
            .copied()
            .unwrap_or(0)
    }
}

/// Earliest arrival per tx. Equal timestamps go to the lexicographically
/// first region name; the losing side of every such comparison is counted.
pub fn first_seen(arrivals: &[ArrivalRecord]) -> FirstSeenSummary {
    let mut by_tx: BTreeMap<&str, Vec<&ArrivalRecord>> = BTreeMap::new();
    for rec in arrivals {
        by_tx.entry(&rec.tx_id).or_default().push(rec);
    }

    let mut summary = FirstSeenSummary::default();
    for (tx_id, records) in by_tx {
        let min_t = records.iter().map(|r| r.t_ms).min().expect("nonempty group");
        let mut at_min: Vec<&str> = records
            .iter()
            .filter(|r| r.t_ms == min_t)
            .map(|r| r.region.as_str())
            .collect();
        at_min.sort_unstable();
        let winner = at_min[0];
        summary.ties += (at_min.len() - 1) as u64;
        *summary.wins_by_region.entry(winner.to_string()).or_insert(0) += 1;
        summary.per_tx.insert(
            tx_id.to_string(),
            FirstSeen {
                region: winner.to_string(),
                t_ms: min_t,
            },
        );
    }
    summary
}

/// One delta per non-first region per tx, in (tx, region) order. A tx seen
/// in a single region produces nothing.
pub fn latency_deltas(arrivals: &[ArrivalRecord]) -> Vec<Delta> {
    let firsts = first_seen(arrivals);
    let mut by_tx: BTreeMap<&str, Vec<&ArrivalRecord>> = BTreeMap::new();
    for rec in arrivals {
        by_tx.entry(&rec.tx_id).or_default().push(rec);
    }

    let mut deltas = Vec::new();
    for (tx_id, mut records) in by_tx {
        let first = &firsts.per_tx[tx_id];
        records.sort_unstable_by(|a, b| a.region.cmp(&b.region));
        for rec in records {
            if rec.region != first.region {
                deltas.push(Delta {
                    first_region: first.region.clone(),
                    region: rec.region.clone(),
                    delta_ms: rec.t_ms - first.t_ms,
                });
            }
        }
    }
    deltas
}

/// Lower median: for even counts the smaller of the two central values, so
/// every reported median is an observed delta.
fn lower_median(sorted: &[i64]) -> i64 {
    sorted[(sorted.len() - 1) / 2]
}

pub fn median_matrix(deltas: &[Delta]) -> LatencyMatrix {
    let mut samples: BTreeMap<(&str, &str), Vec<i64>> = BTreeMap::new();
    let mut regions: BTreeSet<&str> = BTreeSet::new();
    for d in deltas {
        regions.insert(&d.first_region);
        regions.insert(&d.region);
        samples
            .entry((&d.first_region, &d.region))
            .or_default()
            .push(d.delta_ms);
    }

    let mut matrix = LatencyMatrix {
        regions: regions.iter().map(|r| r.to_string()).collect(),
        ..LatencyMatrix::default()
    };
    for region in &regions {
        matrix
            .medians
            .entry(region.to_string())
            .or_default()
            .insert(region.to_string(), 0);
    }
    for ((from, to), mut values) in samples {
        values.sort_unstable();
        matrix
            .medians
            .entry(from.to_string())
            .or_default()
            .insert(to.to_string(), lower_median(&values));
        matrix
            .counts
            .entry(from.to_string())
            .or_default()
            .insert(to.to_string(), values.len() as u64);
    }
    matrix
}

/// Pearson correlation of great-circle distance against median latency over
/// unordered region pairs. Where both directions of a pair have a median the
/// two are averaged; pairs with no samples in either direction are skipped.
pub fn distance_latency_correlation(
    matrix: &LatencyMatrix,
    regions: &[Region],
) -> Result<CorrelationResult, LatencyError> {
    let coords: BTreeMap<&str, &Region> =
        regions.iter().map(|r| (r.name.as_str(), r)).collect();

    let mut km = Vec::new();
    let mut ms = Vec::new();
    for (i, a) in matrix.regions.iter().enumerate() {
        for b in &matrix.regions[i + 1..] {
            let forward = matrix.median(a, b);
            let reverse = matrix.median(b, a);
            let median = match (forward, reverse) {
                (Some(f), Some(r)) => (f + r) as f64 / 2.0,
                (Some(f), None) => f as f64,
                (None, Some(r)) => r as f64,
                (None, None) => continue,
            };
            let ra = coords
                .get(a.as_str())
                .ok_or_else(|| LatencyError::UnknownRegion { name: a.clone() })?;
            let rb = coords
                .get(b.as_str())
                .ok_or_else(|| LatencyError::UnknownRegion { name: b.clone() })?;
            km.push(haversine_km(ra, rb));
            ms.push(median);
        }
    }
    Ok(pearson(&km, &ms)?)
}

/// Subtract per-region clock offsets (positive offset = that region's clock
/// runs ahead). Regions absent from the map are left untouched.
pub fn apply_skew(arrivals: &mut [ArrivalRecord], offsets: &BTreeMap<String, i64>) {
    for rec in arrivals.iter_mut() {
        if let Some(offset) = offsets.get(&rec.region) {
            rec.t_ms -= offset;
        }
    }
}

pub fn read_arrivals_csv(path: &Path) -> Result<Vec<ArrivalRecord>, LatencyError> {
    let file = File::open(path).map_err(|e| LatencyError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<ArrivalRecord>().enumerate() {
        let rec: ArrivalRecord = row.map_err(|e| LatencyError::BadRecord {
            path: path.to_path_buf(),
            line: i + 2,
            reason: e.to_string(),
        })?;
        if !seen.insert((rec.tx_id.clone(), rec.region.clone())) {
            return Err(LatencyError::DuplicateArrival {
                tx_id: rec.tx_id,
                region: rec.region,
            });
        }
        out.push(rec);
    }
    Ok(out)
}

/// Writes sorted by time (ties by tx then region) so logs concatenate into
/// chronological order.
pub fn write_arrivals_csv(path: &Path, arrivals: &[ArrivalRecord]) -> Result<(), LatencyError> {
    std::fs::write(path, arrivals_csv_bytes(arrivals)).map_err(|e| LatencyError::io(path, e))
}

/// The heat map as CSV: one row per observed (first_region, region) cell,
/// diagonal included.
pub fn heatmap_csv(matrix: &LatencyMatrix) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["from_region", "to_region", "median_ms", "samples"])
        .expect("in-memory csv");
    for (from, row) in &matrix.medians {
        for (to, median) in row {
            writer
                .write_record([
                    from.as_str(),
                    to.as_str(),
                    &median.to_string(),
                    &matrix.count(from, to).to_string(),
                ])
                .expect("in-memory csv");
        }
    }
    writer.into_inner().expect("in-memory csv")
}

/// Serialized form shared by the file writer and the report renderer, so an
/// embedded copy is byte-identical to a written one.
pub(crate) fn arrivals_csv_bytes(arrivals: &[ArrivalRecord]) -> Vec<u8> {
    let mut rows: Vec<&ArrivalRecord> = arrivals.iter().collect();
    rows.sort_by(|a, b| {
        a.t_ms
            .cmp(&b.t_ms)
            .then_with(|| a.tx_id.cmp(&b.tx_id))
            .then_with(|| a.region.cmp(&b.region))
    });
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("in-memory csv");
    }
    writer.into_inner().expect("in-memory csv")
}

#[derive(Deserialize)]
struct OffsetRow {
    region: String,
    offset_ms: i64,
}

/// Per-region clock offsets, CSV `region,offset_ms`.
pub fn read_offsets_csv(path: &Path) -> Result<BTreeMap<String, i64>, LatencyError> {
    let file = File::open(path).map_err(|e| LatencyError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = BTreeMap::new();
    for (i, row) in reader.deserialize::<OffsetRow>().enumerate() {
        let rec: OffsetRow = row.map_err(|e| LatencyError::BadRecord {
            path: path.to_path_buf(),
            line: i + 2,
            reason: e.to_string(),
        })?;
        if out.insert(rec.region.clone(), rec.offset_ms).is_some() {
            return Err(LatencyError::BadRecord {
                path: path.to_path_buf(),
                line: i + 2,
                reason: format!("duplicate offset for region {:?}", rec.region),
            });
        }
    }
    Ok(out)
}
