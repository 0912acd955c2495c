//! Regions and great-circle distance.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LatencyError;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// The cloud regions the measurement network ran in, with datacenter-city
/// coordinates. Compiled in so analysis tools work without a region file.
const REGIONS_CSV: &str = include_str!("aws_regions.csv");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

impl Region {
    pub fn new(
        name: impl Into<String>,
        lat: f64,
        lon: f64,
    ) -> Result<Self, LatencyError> {
        let region = Region {
            name: name.into(),
            lat,
            lon,
        };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<(), LatencyError> {
        let fail = |reason: String| LatencyError::InvalidRegion {
            name: self.name.clone(),
            reason,
        };
        if self.name.is_empty() {
            return Err(fail("empty name".into()));
        }
        if !self.lat.is_finite() || !(-90.0..=90.0).contains(&self.lat) {
            return Err(fail(format!("latitude {} outside [-90, 90]", self.lat)));
        }
        if !self.lon.is_finite() || !(-180.0..=180.0).contains(&self.lon) {
            return Err(fail(format!("longitude {} outside [-180, 180]", self.lon)));
        }
        Ok(())
    }
}

/// Great-circle distance in kilometres.
///
/// Haversine with the clamped-asin form, which stays numerically sane for
/// antipodal and near-identical points alike.
pub fn haversine_km(a: &Region, b: &Region) -> f64 {
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    let half_dlat = (lat_b - lat_a) / 2.0;
    let half_dlon = (b.lon - a.lon).to_radians() / 2.0;
    let h = half_dlat.sin().powi(2) + lat_a.cos() * lat_b.cos() * half_dlon.sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// The 24 shipped regions, sorted by name.
pub fn default_regions() -> Vec<Region> {
    parse_regions(REGIONS_CSV, Path::new("<builtin>"))
        .expect("embedded region table is valid")
}

pub fn read_regions_csv(path: &Path) -> Result<Vec<Region>, LatencyError> {
    let raw = std::fs::read_to_string(path).map_err(|e| LatencyError::io(path, e))?;
    parse_regions(&raw, path)
}

fn parse_regions(raw: &str, path: &Path) -> Result<Vec<Region>, LatencyError> {
    let mut reader = csv::Reader::from_reader(raw.as_bytes());
    let mut out: Vec<Region> = Vec::new();
    for (i, row) in reader.deserialize::<Region>().enumerate() {
        // header is line 1
        let line = i + 2;
        let region: Region = row.map_err(|e| LatencyError::BadRecord {
            path: path.to_path_buf(),
            line,
            reason: e.to_string(),
        })?;
        region.validate()?;
        if out.iter().any(|r| r.name == region.name) {
            return Err(LatencyError::BadRecord {
                path: path.to_path_buf(),
                line,
                reason: format!("duplicate region {:?}", region.name),
            });
        }
        out.push(region);
    }
    Ok(out)
}

pub fn write_regions_csv(path: &Path, regions: &[Region]) -> Result<(), LatencyError> {
    std::fs::write(path, regions_csv_bytes(regions)).map_err(|e| LatencyError::io(path, e))
}

pub(crate) fn regions_csv_bytes(regions: &[Region]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for region in regions {
        writer.serialize(region).expect("in-memory csv");
    }
    writer.into_inner().expect("in-memory csv")
}
