//! Latency-war simulator.
//!
//! Per opportunity: an origin region emits a target transaction; every bot
//! instance hears about it after a distance-dependent delay, spends its
//! compute delay, and submits. The submission that reaches the validator
//! first wins; every other submission, including the winner's own duplicates
//! from co-instances, reverts. That duplication is what the repeated-rate
//! analog measures.
//!
//! Determinism: every random draw comes from its own ChaCha8 stream keyed by
//! (seed, label, opportunity, instance). Adding a searcher or appending an
//! instance never shifts anyone else's draws, which is what makes the
//! instance-monotonicity property testable seed by seed.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::analyze::ArrivalRecord;
use super::geo::{haversine_km, Region};
use super::LatencyError;

/// Epoch base for exported arrival logs (2022-04-01T00:00:00Z). Arbitrary
/// but fixed: exports must be byte-identical across runs.
pub const EPOCH_MS: i64 = 1_648_771_200_000;

/// Spacing between opportunity emission times in exported logs.
pub const OPPORTUNITY_SPACING_MS: i64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModelCfg {
    /// Fixed per-hop overhead.
    #[serde(default = "default_base_ms")]
    pub base_ms: f64,
    /// Linear distance term, fit to the measured medians.
    #[serde(default = "default_ms_per_km")]
    pub ms_per_km: f64,
    /// Sigma of the zero-truncated normal jitter added per hop.
    #[serde(default)]
    pub jitter_sigma_ms: f64,
}

fn default_base_ms() -> f64 {
    5.0
}

fn default_ms_per_km() -> f64 {
    0.02
}

impl Default for LatencyModelCfg {
    fn default() -> Self {
        LatencyModelCfg {
            base_ms: default_base_ms(),
            ms_per_km: default_ms_per_km(),
            jitter_sigma_ms: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearcherCfg {
    pub id: String,
    pub instance_regions: Vec<String>,
    #[serde(default)]
    pub compute_delay_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginDist {
    /// Uniform over the configured regions.
    #[default]
    Uniform,
    /// Weighted by region name; omitted regions have weight zero.
    Weighted(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValidatorPlacement {
    /// Single fixed validator region.
    Fixed(String),
    /// Round-robin over a schedule, one step per opportunity.
    Rotation { rotation: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub regions: Vec<Region>,
    #[serde(default)]
    pub latency_model: LatencyModelCfg,
    pub searchers: Vec<SearcherCfg>,
    pub n_opportunities: u64,
    #[serde(default)]
    pub opportunity_origin: OriginDist,
    pub validator_region: ValidatorPlacement,
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Self, LatencyError> {
        let raw = std::fs::read_to_string(path).map_err(|e| LatencyError::io(path, e))?;
        let cfg: SimConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&raw).map_err(|e| LatencyError::InvalidConfig {
                field: path.display().to_string(),
                reason: e.to_string(),
            })?
        } else {
            serde_json::from_str(&raw).map_err(|e| LatencyError::InvalidConfig {
                field: path.display().to_string(),
                reason: e.to_string(),
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LatencyError> {
        let bad = |field: &str, reason: String| LatencyError::InvalidConfig {
            field: field.to_string(),
            reason,
        };

        if self.regions.is_empty() {
            return Err(bad("regions", "at least one region required".into()));
        }
        let mut names: Vec<&str> = Vec::new();
        for (i, region) in self.regions.iter().enumerate() {
            region.validate()?;
            if names.contains(&region.name.as_str()) {
                return Err(bad(
                    &format!("regions[{i}].name"),
                    format!("duplicate region {:?}", region.name),
                ));
            }
            names.push(&region.name);
        }

        let model = &self.latency_model;
        for (field, value) in [
            ("latency_model.base_ms", model.base_ms),
            ("latency_model.ms_per_km", model.ms_per_km),
            ("latency_model.jitter_sigma_ms", model.jitter_sigma_ms),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(bad(field, format!("{value} must be finite and >= 0")));
            }
        }

        if self.searchers.is_empty() {
            return Err(bad("searchers", "at least one searcher required".into()));
        }
        let mut ids: Vec<&str> = Vec::new();
        for (s, searcher) in self.searchers.iter().enumerate() {
            if searcher.id.is_empty() {
                return Err(bad(&format!("searchers[{s}].id"), "empty id".into()));
            }
            if ids.contains(&searcher.id.as_str()) {
                return Err(bad(
                    &format!("searchers[{s}].id"),
                    format!("duplicate searcher {:?}", searcher.id),
                ));
            }
            ids.push(&searcher.id);
            if searcher.instance_regions.is_empty() {
                return Err(bad(
                    &format!("searchers[{s}].instance_regions"),
                    "at least one instance required".into(),
                ));
            }
            for (i, region) in searcher.instance_regions.iter().enumerate() {
                if !names.contains(&region.as_str()) {
                    return Err(bad(
                        &format!("searchers[{s}].instance_regions[{i}]"),
                        format!("unknown region {region:?}"),
                    ));
                }
            }
            if !searcher.compute_delay_ms.is_finite() || searcher.compute_delay_ms < 0.0 {
                return Err(bad(
                    &format!("searchers[{s}].compute_delay_ms"),
                    "must be finite and >= 0".into(),
                ));
            }
        }

        if self.n_opportunities == 0 {
            return Err(bad("n_opportunities", "must be >= 1".into()));
        }

        if let OriginDist::Weighted(weights) = &self.opportunity_origin {
            if weights.is_empty() {
                return Err(bad("opportunity_origin", "empty weight map".into()));
            }
            for (region, weight) in weights {
                if !names.contains(&region.as_str()) {
                    return Err(bad(
                        &format!("opportunity_origin.{region}"),
                        "unknown region".into(),
                    ));
                }
                if !weight.is_finite() || *weight <= 0.0 {
                    return Err(bad(
                        &format!("opportunity_origin.{region}"),
                        format!("weight {weight} must be finite and > 0"),
                    ));
                }
            }
        }

        match &self.validator_region {
            ValidatorPlacement::Fixed(region) => {
                if !names.contains(&region.as_str()) {
                    return Err(bad("validator_region", format!("unknown region {region:?}")));
                }
            }
            ValidatorPlacement::Rotation { rotation } => {
                if rotation.is_empty() {
                    return Err(bad("validator_region.rotation", "empty schedule".into()));
                }
                for (i, region) in rotation.iter().enumerate() {
                    if !names.contains(&region.as_str()) {
                        return Err(bad(
                            &format!("validator_region.rotation[{i}]"),
                            format!("unknown region {region:?}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One submission racing toward the validator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Attempt {
    pub searcher_id: String,
    pub instance_region: String,
    /// When the instance heard about the opportunity, ms after emission.
    pub heard_ms: f64,
    /// When the submission reached the validator, ms after emission.
    pub validator_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpportunityResult {
    pub opportunity: u64,
    pub origin: String,
    pub validator: String,
    pub winner: String,
    /// Every submission, in (searcher, instance) config order.
    pub attempts: Vec<Attempt>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearcherOutcome {
    pub searcher_id: String,
    pub n_success: u64,
    pub n_failed: u64,
    pub success_rate: f64,
    /// One unit per win.
    pub profit: u64,
    /// Mean identical submissions per opportunity, the repeated-tx analog.
    pub repeated_tx_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimOutcome {
    pub seed: u64,
    pub opportunities: Vec<OpportunityResult>,
    /// Config order, matching `SimConfig::searchers`.
    pub searchers: Vec<SearcherOutcome>,
    /// Validator-arrival ties resolved by the seeded rank draw.
    pub ties_broken: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream per (seed, label, indices). The label keys on names
/// (searcher ids), not list positions, so config edits stay local.
fn stream(seed: u64, label: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed);
    for chunk in label.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        state = splitmix64(state ^ u64::from_le_bytes(word));
    }
    for &index in indices {
        state = splitmix64(state ^ index);
    }
    ChaCha8Rng::seed_from_u64(state)
}

struct DistanceTable {
    index: BTreeMap<String, usize>,
    km: Vec<Vec<f64>>,
}

impl DistanceTable {
    fn new(regions: &[Region]) -> Self {
        let index = regions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), i))
            .collect();
        let km = regions
            .iter()
            .map(|a| regions.iter().map(|b| haversine_km(a, b)).collect())
            .collect();
        DistanceTable { index, km }
    }

    fn km(&self, a: &str, b: &str) -> f64 {
        self.km[self.index[a]][self.index[b]]
    }
}

/// Zero-truncated normal jitter. Rejection sampling of the negative half of
/// a centered normal is distribution-identical to taking |N(0, sigma)|, so
/// one draw suffices and the stream stays fixed-length.
fn jitter(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    normal.sample(rng).abs()
}

pub fn simulate(cfg: &SimConfig) -> Result<SimOutcome, LatencyError> {
    cfg.validate()?;

    let distances = DistanceTable::new(&cfg.regions);
    let model = &cfg.latency_model;
    let hop = |from: &str, to: &str, jit: f64| {
        model.base_ms + model.ms_per_km * distances.km(from, to) + jit
    };

    let origin_pool: Vec<(&str, f64)> = match &cfg.opportunity_origin {
        OriginDist::Uniform => cfg.regions.iter().map(|r| (r.name.as_str(), 1.0)).collect(),
        OriginDist::Weighted(weights) => {
            weights.iter().map(|(r, w)| (r.as_str(), *w)).collect()
        }
    };
    let total_weight: f64 = origin_pool.iter().map(|(_, w)| w).sum();

    let mut opportunities = Vec::with_capacity(cfg.n_opportunities as usize);
    let mut wins: BTreeMap<String, u64> = BTreeMap::new();
    let mut ties_broken = 0u64;

    for k in 0..cfg.n_opportunities {
        let origin = {
            let mut rng = stream(cfg.seed, "origin", &[k]);
            let mut pick = rng.random::<f64>() * total_weight;
            let mut chosen = origin_pool[origin_pool.len() - 1].0;
            for (region, weight) in &origin_pool {
                if pick < *weight {
                    chosen = region;
                    break;
                }
                pick -= weight;
            }
            chosen
        };

        let validator = match &cfg.validator_region {
            ValidatorPlacement::Fixed(region) => region.as_str(),
            ValidatorPlacement::Rotation { rotation } => {
                rotation[(k % rotation.len() as u64) as usize].as_str()
            }
        };

        let mut attempts = Vec::new();
        // (validator_ms, tie rank, attempt index): the rank is drawn per
        // (opportunity, searcher) independently of instances, so ties never
        // systematically favor low ids.
        let mut best: Option<(f64, u64, usize)> = None;
        let mut tied = false;
        for searcher in &cfg.searchers {
            let tie_rank = stream(cfg.seed, &format!("tie/{}", searcher.id), &[k]).next_u64();
            for (i, instance) in searcher.instance_regions.iter().enumerate() {
                let mut rng =
                    stream(cfg.seed, &format!("inst/{}", searcher.id), &[k, i as u64]);
                let heard = hop(origin, instance, jitter(&mut rng, model.jitter_sigma_ms));
                let validator_ms = heard
                    + searcher.compute_delay_ms
                    + hop(instance, validator, jitter(&mut rng, model.jitter_sigma_ms));
                let key = (validator_ms, tie_rank, attempts.len());
                match &mut best {
                    None => best = Some(key),
                    Some(current) => {
                        if key.0 < current.0 {
                            *current = key;
                            tied = false;
                        } else if key.0 == current.0 {
                            tied = true;
                            if (key.1, key.2) < (current.1, current.2) {
                                *current = key;
                            }
                        }
                    }
                }
                attempts.push(Attempt {
                    searcher_id: searcher.id.clone(),
                    instance_region: instance.clone(),
                    heard_ms: heard,
                    validator_ms,
                });
            }
        }

        let (_, _, winner_idx) = best.expect("at least one searcher instance");
        if tied {
            ties_broken += 1;
        }
        let winner = attempts[winner_idx].searcher_id.clone();
        *wins.entry(winner.clone()).or_insert(0) += 1;

        opportunities.push(OpportunityResult {
            opportunity: k,
            origin: origin.to_string(),
            validator: validator.to_string(),
            winner,
            attempts,
        });
    }

    let searchers = cfg
        .searchers
        .iter()
        .map(|s| {
            let n_success = wins.get(s.id.as_str()).copied().unwrap_or(0);
            let n_attempts = cfg.n_opportunities * s.instance_regions.len() as u64;
            SearcherOutcome {
                searcher_id: s.id.clone(),
                n_success,
                n_failed: n_attempts - n_success,
                success_rate: n_success as f64 / n_attempts as f64,
                profit: n_success,
                repeated_tx_rate: s.instance_regions.len() as f64,
            }
        })
        .collect();

    Ok(SimOutcome {
        seed: cfg.seed,
        opportunities,
        searchers,
        ties_broken,
    })
}

/// Mempool-arrival view of a simulation: per opportunity, the earliest heard
/// time in each distinct instance region, on a fixed epoch. Round-trips into
/// the analyzer.
pub fn export_arrivals(outcome: &SimOutcome) -> Vec<ArrivalRecord> {
    let mut records = Vec::new();
    for opp in &outcome.opportunities {
        let emitted = EPOCH_MS + opp.opportunity as i64 * OPPORTUNITY_SPACING_MS;
        let mut earliest: BTreeMap<&str, f64> = BTreeMap::new();
        for attempt in &opp.attempts {
            earliest
                .entry(&attempt.instance_region)
                .and_modify(|t| *t = t.min(attempt.heard_ms))
                .or_insert(attempt.heard_ms);
        }
        for (region, heard) in earliest {
            records.push(ArrivalRecord {
                tx_id: format!("opp-{:08}", opp.opportunity),
                region: region.to_string(),
                t_ms: emitted + heard.round() as i64,
            });
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::super::analyze::{distance_latency_correlation, latency_deltas, median_matrix};
    use super::super::geo::default_regions;
    use super::*;

    fn two_region_config() -> SimConfig {
        SimConfig {
            seed: 1,
            regions: vec![
                Region::new("east", 39.0, -77.0).unwrap(),
                Region::new("west", 37.7, -122.4).unwrap(),
            ],
            latency_model: LatencyModelCfg::default(),
            searchers: vec![SearcherCfg {
                id: "solo".into(),
                instance_regions: vec!["east".into()],
                compute_delay_ms: 10.0,
            }],
            n_opportunities: 100,
            opportunity_origin: OriginDist::Uniform,
            validator_region: ValidatorPlacement::Fixed("east".into()),
        }
    }

    #[test]
    fn lone_searcher_always_wins() {
        let outcome = simulate(&two_region_config()).unwrap();
        let solo = &outcome.searchers[0];
        assert_eq!(solo.n_success, 100);
        assert_eq!(solo.n_failed, 0);
        assert_eq!(solo.success_rate, 1.0);
        assert_eq!(solo.repeated_tx_rate, 1.0);
        assert_eq!(solo.profit, 100);
    }

    #[test]
    fn colocated_equal_searchers_split_wins_evenly() {
        let mut cfg = two_region_config();
        cfg.n_opportunities = 10_000;
        cfg.searchers = vec![
            SearcherCfg {
                id: "alpha".into(),
                instance_regions: vec!["east".into()],
                compute_delay_ms: 10.0,
            },
            SearcherCfg {
                id: "beta".into(),
                instance_regions: vec!["east".into()],
                compute_delay_ms: 10.0,
            },
        ];
        let outcome = simulate(&cfg).unwrap();
        // Identical deterministic latencies: every opportunity is a tie.
        assert_eq!(outcome.ties_broken, 10_000);
        let alpha = outcome.searchers[0].n_success as f64 / 10_000.0;
        assert!((alpha - 0.5).abs() < 0.02, "alpha share {alpha}");
        assert_eq!(
            outcome.searchers[0].n_success + outcome.searchers[1].n_success,
            10_000
        );
    }

    #[test]
    fn attempts_conserve_and_losers_arrive_later() {
        let mut cfg = two_region_config();
        cfg.latency_model.jitter_sigma_ms = 20.0;
        cfg.searchers = vec![
            SearcherCfg {
                id: "a".into(),
                instance_regions: vec!["east".into(), "west".into()],
                compute_delay_ms: 5.0,
            },
            SearcherCfg {
                id: "b".into(),
                instance_regions: vec!["west".into()],
                compute_delay_ms: 5.0,
            },
        ];
        let outcome = simulate(&cfg).unwrap();
        let total_attempts: u64 = outcome
            .opportunities
            .iter()
            .map(|o| o.attempts.len() as u64)
            .sum();
        let success: u64 = outcome.searchers.iter().map(|s| s.n_success).sum();
        let failed: u64 = outcome.searchers.iter().map(|s| s.n_failed).sum();
        assert_eq!(success, cfg.n_opportunities);
        assert_eq!(success + failed, total_attempts);

        for opp in &outcome.opportunities {
            let winner_t = opp
                .attempts
                .iter()
                .filter(|a| a.searcher_id == opp.winner)
                .map(|a| a.validator_ms)
                .fold(f64::INFINITY, f64::min);
            for attempt in &opp.attempts {
                assert!(attempt.validator_ms >= winner_t);
                assert!(attempt.heard_ms >= cfg.latency_model.base_ms);
            }
        }
    }

    #[test]
    fn identical_config_is_bit_identical() {
        let mut cfg = two_region_config();
        cfg.latency_model.jitter_sigma_ms = 15.0;
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn appending_a_searcher_leaves_existing_draws_alone() {
        let mut cfg = two_region_config();
        cfg.latency_model.jitter_sigma_ms = 20.0;
        let before = simulate(&cfg).unwrap();
        cfg.searchers.push(SearcherCfg {
            id: "late".into(),
            instance_regions: vec!["west".into()],
            compute_delay_ms: 1000.0,
        });
        let after = simulate(&cfg).unwrap();
        for (x, y) in before.opportunities.iter().zip(&after.opportunities) {
            assert_eq!(x.origin, y.origin);
            // solo's attempt draws are untouched by the new entrant
            assert_eq!(x.attempts[0], y.attempts[0]);
        }
    }

    #[test]
    fn export_one_record_per_instance_region() {
        let mut cfg = two_region_config();
        cfg.n_opportunities = 1;
        cfg.searchers = vec![
            SearcherCfg {
                id: "a".into(),
                instance_regions: vec!["east".into(), "west".into()],
                compute_delay_ms: 0.0,
            },
            SearcherCfg {
                id: "b".into(),
                instance_regions: vec!["east".into()],
                compute_delay_ms: 0.0,
            },
        ];
        let outcome = simulate(&cfg).unwrap();
        let arrivals = export_arrivals(&outcome);
        assert_eq!(arrivals.len(), 2); // east (min of two), west
        assert!(arrivals.iter().all(|r| r.tx_id == "opp-00000000"));
        assert!(arrivals.iter().all(|r| r.t_ms >= EPOCH_MS));
    }

    #[test]
    fn analyzer_recovers_model_from_export() {
        let regions = default_regions();
        let cfg = SimConfig {
            seed: 42,
            regions: regions.clone(),
            latency_model: LatencyModelCfg {
                base_ms: 5.0,
                ms_per_km: 0.02,
                jitter_sigma_ms: 0.0,
            },
            searchers: vec![SearcherCfg {
                id: "probe".into(),
                instance_regions: regions.iter().map(|r| r.name.clone()).collect(),
                compute_delay_ms: 0.0,
            }],
            n_opportunities: 500,
            opportunity_origin: OriginDist::Uniform,
            validator_region: ValidatorPlacement::Fixed("eu-central-1".into()),
        };
        let arrivals = export_arrivals(&simulate(&cfg).unwrap());
        let matrix = median_matrix(&latency_deltas(&arrivals));
        let rho = distance_latency_correlation(&matrix, &regions).unwrap().rho;
        assert!(rho > 0.99, "rho = {rho}");
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut cfg = two_region_config();
        cfg.searchers[0].instance_regions.push("mars".into());
        let err = simulate(&cfg).unwrap_err();
        match err {
            LatencyError::InvalidConfig { field, reason } => {
                assert_eq!(field, "searchers[0].instance_regions[1]");
                assert!(reason.contains("mars"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        let mut cfg = two_region_config();
        cfg.n_opportunities = 0;
        assert!(matches!(
            simulate(&cfg),
            Err(LatencyError::InvalidConfig { field, .. }) if field == "n_opportunities"
        ));
    }

    #[test]
    fn config_parses_from_json_and_toml() {
        let dir = tempfile::tempdir().unwrap();
        let json = r#"{
            "seed": 7,
            "regions": [{"name": "east", "lat": 39.0, "lon": -77.0}],
            "searchers": [{"id": "s", "instance_regions": ["east"]}],
            "n_opportunities": 10,
            "validator_region": "east"
        }"#;
        let json_path = dir.path().join("sim.json");
        std::fs::write(&json_path, json).unwrap();
        let cfg = SimConfig::from_file(&json_path).unwrap();
        assert_eq!(cfg.latency_model, LatencyModelCfg::default());
        assert_eq!(cfg.opportunity_origin, OriginDist::Uniform);
        assert_eq!(
            cfg.validator_region,
            ValidatorPlacement::Fixed("east".into())
        );

        let toml_src = r#"
            seed = 7
            n_opportunities = 10
            validator_region = { rotation = ["east"] }

            [[regions]]
            name = "east"
            lat = 39.0
            lon = -77.0

            [[searchers]]
            id = "s"
            instance_regions = ["east"]
            compute_delay_ms = 2.5
        "#;
        let toml_path = dir.path().join("sim.toml");
        std::fs::write(&toml_path, toml_src).unwrap();
        let cfg = SimConfig::from_file(&toml_path).unwrap();
        assert_eq!(
            cfg.validator_region,
            ValidatorPlacement::Rotation {
                rotation: vec!["east".into()]
            }
        );
        assert_eq!(cfg.searchers[0].compute_delay_ms, 2.5);
    }
}
