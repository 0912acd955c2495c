//! Per-searcher statistics and the correlation suite.
//!
//! Money stays exact: profits aggregate as u128 per start token,
//! profit_rate and repeated_tx_rate are rationals. Floats appear only when
//! a quantity enters a correlation.

pub mod correlation;
pub mod distributions;

use std::collections::{BTreeMap, BTreeSet};

use num::rational::Ratio;
use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbdetect::ArbitrageRecord;
use crate::failedarb::FailedArbRecord;
use crate::searchers::{ClusterError, ClusterLookup, SearcherCluster, UNCLUSTERED};

pub use correlation::{mid_ranks, pearson, spearman, CorrelationResult, Method};
pub use distributions::{distributions, DistributionOptions, DistributionReport};

/// Default minimum-success thresholds for the correlation table.
pub const DEFAULT_THRESHOLDS: [u64; 6] = [10, 50, 100, 250, 500, 750];

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("degenerate input: {reason}")]
    DegenerateInput { reason: String },
    #[error("searcher has no recorded activity")]
    NoActivity,
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Per-block message counts, written by the detection pass so volume
/// distributions don't need the chain again.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStat {
    pub height: u64,
    /// Normalized execute messages in the block (any exit code).
    pub txs: u64,
    pub reverted: u64,
}

/// Exact repeated-transaction index: total transactions over distinct
/// (block, canonical message) groups. 1 exactly when nothing repeats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatedRate {
    pub total: u64,
    pub groups: u64,
}

impl RepeatedRate {
    pub fn value(&self) -> Ratio<u64> {
        Ratio::new(self.total, self.groups)
    }

    pub fn as_f64(&self) -> f64 {
        self.total as f64 / self.groups as f64
    }
}

/// The repeated-transaction index over (height, msg_hash) observations.
/// `None` when the searcher has no transactions at all.
pub fn repeated_tx_rate<'a>(
    txs: impl IntoIterator<Item = (u64, &'a str)>,
) -> Option<RepeatedRate> {
    let mut total = 0u64;
    let mut groups: BTreeSet<(u64, &str)> = BTreeSet::new();
    for (height, msg_hash) in txs {
        total += 1;
        groups.insert((height, msg_hash));
    }
    (total > 0).then_some(RepeatedRate { total, groups: groups.len() as u64 })
}

/// Successes over total attempts.
pub fn success_rate(n_success: u64, n_failed: u64) -> Result<f64, MetricsError> {
    let total = n_success + n_failed;
    if total == 0 {
        return Err(MetricsError::NoActivity);
    }
    Ok(n_success as f64 / total as f64)
}

/// (amount_out − amount_in) / amount_in, exact.
pub fn profit_rate(record: &ArbitrageRecord) -> BigRational {
    BigRational::new(record.profit.into(), record.amount_in.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearcherStats {
    pub searcher_id: String,
    pub n_success: u64,
    pub n_failed: u64,
    /// n_success / (n_success + n_failed); both counts ride along so
    /// nothing is lost to the division.
    pub success_rate: f64,
    #[serde(with = "crate::serde_util::u128_map")]
    pub profit_by_token: BTreeMap<String, u128>,
    pub n_contracts: u64,
    pub n_senders: u64,
    pub repeated_tx_rate: RepeatedRate,
    pub gas_success: u64,
    pub gas_failed: u64,
}

#[derive(Default)]
struct Acc {
    n_success: u64,
    n_failed: u64,
    profit_by_token: BTreeMap<String, u128>,
    contracts: BTreeSet<String>,
    senders: BTreeSet<String>,
    total_txs: u64,
    groups: BTreeSet<(u64, String)>,
    gas_success: u64,
    gas_failed: u64,
}

impl Acc {
    fn observe(&mut self, sender: &str, contract: &str, height: u64, msg_hash: &str, gas: u64, success: bool) {
        self.senders.insert(sender.to_string());
        self.contracts.insert(contract.to_string());
        self.total_txs += 1;
        self.groups.insert((height, msg_hash.to_string()));
        if success {
            self.n_success += 1;
            self.gas_success += gas;
        } else {
            self.n_failed += 1;
            self.gas_failed += gas;
        }
    }
}

/// Roll records up per searcher. Records whose endpoints joined no cluster
/// land under the synthetic [`UNCLUSTERED`] id so the totals stay
/// conserved: Σ n_success == |arbs| and Σ n_failed == |failed|.
pub fn build_searcher_stats(
    arbs: &[ArbitrageRecord],
    failed: &[FailedArbRecord],
    clusters: &[SearcherCluster],
) -> Result<Vec<SearcherStats>, MetricsError> {
    let lookup = ClusterLookup::new(clusters);
    let mut accs: BTreeMap<String, Acc> = BTreeMap::new();
    for r in arbs {
        let id = lookup.assign(&r.sender, &r.contract)?;
        let acc = accs.entry(id.to_string()).or_default();
        acc.observe(&r.sender, &r.contract, r.height, &r.msg_hash, r.gas_used, true);
        *acc.profit_by_token.entry(r.token_start.clone()).or_insert(0) += r.profit;
    }
    for r in failed {
        let id = lookup.assign(&r.sender, &r.contract)?;
        accs.entry(id.to_string()).or_default().observe(
            &r.sender, &r.contract, r.height, &r.msg_hash, r.gas_used, false,
        );
    }
    Ok(accs
        .into_iter()
        .map(|(searcher_id, acc)| SearcherStats {
            searcher_id,
            n_success: acc.n_success,
            n_failed: acc.n_failed,
            success_rate: acc.n_success as f64 / (acc.n_success + acc.n_failed) as f64,
            profit_by_token: acc.profit_by_token,
            n_contracts: acc.contracts.len() as u64,
            n_senders: acc.senders.len() as u64,
            repeated_tx_rate: RepeatedRate { total: acc.total_txs, groups: acc.groups.len() as u64 },
            gas_success: acc.gas_success,
            gas_failed: acc.gas_failed,
        })
        .collect())
}

/// One threshold's worth of correlations. Absent entries mean the filtered
/// population was too small or degenerate for that statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub threshold: u64,
    pub n: usize,
    pub success_rate_vs_profit: Option<CorrelationResult>,
    pub repeated_rate_vs_profit: Option<CorrelationResult>,
    pub profit_vs_n_success: Option<CorrelationResult>,
    pub n_contracts_vs_n_success: Option<CorrelationResult>,
    pub n_senders_vs_n_success: Option<CorrelationResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// Profit denominations don't mix, so the suite correlates profit in
    /// one start token. Defaults to the token with the largest aggregate.
    pub profit_token: String,
    pub rows: Vec<ThresholdRow>,
}

/// The threshold table: filter to searchers with at least `threshold`
/// successes, then correlate. Spearman for the rate relations (the rates
/// are heavy-tailed), Pearson for the profit-vs-count trio.
pub fn correlation_suite(
    stats: &[SearcherStats],
    thresholds: &[u64],
    profit_token: Option<&str>,
) -> CorrelationTable {
    let pool: Vec<&SearcherStats> =
        stats.iter().filter(|s| s.searcher_id != UNCLUSTERED).collect();
    let profit_token = profit_token.map(str::to_string).unwrap_or_else(|| {
        let mut totals: BTreeMap<&str, u128> = BTreeMap::new();
        for s in &pool {
            for (t, p) in &s.profit_by_token {
                *totals.entry(t).or_insert(0) += p;
            }
        }
        totals
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
            .map(|(t, _)| t.to_string())
            .unwrap_or_default()
    });
    let rows = thresholds
        .iter()
        .map(|&threshold| {
            let selected: Vec<&&SearcherStats> =
                pool.iter().filter(|s| s.n_success >= threshold).collect();
            let profit: Vec<f64> = selected
                .iter()
                .map(|s| *s.profit_by_token.get(&profit_token).unwrap_or(&0) as f64)
                .collect();
            let rate: Vec<f64> = selected.iter().map(|s| s.success_rate).collect();
            let repeated: Vec<f64> =
                selected.iter().map(|s| s.repeated_tx_rate.as_f64()).collect();
            let n_success: Vec<f64> = selected.iter().map(|s| s.n_success as f64).collect();
            let n_contracts: Vec<f64> = selected.iter().map(|s| s.n_contracts as f64).collect();
            let n_senders: Vec<f64> = selected.iter().map(|s| s.n_senders as f64).collect();
            ThresholdRow {
                threshold,
                n: selected.len(),
                success_rate_vs_profit: spearman(&rate, &profit).ok(),
                repeated_rate_vs_profit: spearman(&repeated, &profit).ok(),
                profit_vs_n_success: pearson(&profit, &n_success).ok(),
                n_contracts_vs_n_success: pearson(&n_contracts, &n_success).ok(),
                n_senders_vs_n_success: pearson(&n_senders, &n_success).ok(),
            }
        })
        .collect();
    CorrelationTable { profit_token, rows }
}

/// Per-block (successful, failed) counts over the union of observed
/// heights, and their Pearson correlation.
pub fn block_failed_success_correlation(
    arbs: &[ArbitrageRecord],
    failed: &[FailedArbRecord],
) -> Result<CorrelationResult, MetricsError> {
    let mut per_block: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for r in arbs {
        per_block.entry(r.height).or_default().0 += 1;
    }
    for r in failed {
        per_block.entry(r.height).or_default().1 += 1;
    }
    let succ: Vec<f64> = per_block.values().map(|v| v.0 as f64).collect();
    let fail: Vec<f64> = per_block.values().map(|v| v.1 as f64).collect();
    pearson(&succ, &fail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logparse::Action;
    use num::BigInt;
    use proptest::prelude::*;

    pub(crate) fn arb_record(
        sender: &str,
        contract: &str,
        height: u64,
        msg_hash: &str,
        token: &str,
        amount_in: u128,
        amount_out: u128,
    ) -> ArbitrageRecord {
        ArbitrageRecord {
            tx_hash: format!("{sender}-{height}-{msg_hash}"),
            height,
            index_in_block: 0,
            sender: sender.into(),
            contract: contract.into(),
            msg_hash: msg_hash.into(),
            actions: vec![
                Action::new("p1", token, "mid", amount_in, 1).unwrap(),
                Action::new("p2", "mid", token, 1, amount_out).unwrap(),
            ],
            token_start: token.into(),
            amount_in,
            amount_out,
            profit: amount_out - amount_in,
            path_length: 2,
            gas_used: 500_000,
            }
    }

    fn failed_record(sender: &str, contract: &str, height: u64, msg_hash: &str) -> FailedArbRecord {
        FailedArbRecord {
            tx_hash: format!("f-{sender}-{height}-{msg_hash}"),
            height,
            index_in_block: 0,
            sender: sender.into(),
            contract: contract.into(),
            msg_hash: msg_hash.into(),
            matched_conditions: BTreeSet::from([crate::failedarb::Condition::Sender]),
            gas_used: 400_000,
        }
    }

    #[test]
    fn profit_rate_worked_example_is_exact() {
        let r = arb_record("s", "c", 1, "m", "uusd", 105, 115);
        let rate = profit_rate(&r);
        assert_eq!(rate, BigRational::new(BigInt::from(10), BigInt::from(105)));
        assert_eq!(rate, BigRational::new(BigInt::from(2), BigInt::from(21)));
        // decimal expansion of 2/21 = 0.095238095238..., repeating "095238"
        let scaled = (rate * BigRational::from_integer(BigInt::from(1_000_000))).floor();
        assert_eq!(scaled, BigRational::from_integer(BigInt::from(95_238)));
    }

    #[test]
    fn profit_rate_extremes() {
        let tiny = arb_record("s", "c", 1, "m", "uusd", 1_000_000, 1_000_001);
        assert_eq!(profit_rate(&tiny), BigRational::new(BigInt::from(1), BigInt::from(1_000_000)));
        let outlier = arb_record("s", "c", 1, "m", "uusd", 1, 2001);
        assert_eq!(profit_rate(&outlier), BigRational::from_integer(BigInt::from(2000)));
    }

    #[test]
    fn repeated_rate_hand_counts() {
        let r = repeated_tx_rate([(1, "m"), (1, "m"), (1, "m")]).unwrap();
        assert_eq!(r.value(), Ratio::new(3, 1));
        let r = repeated_tx_rate([(1, "a"), (1, "b"), (2, "a")]).unwrap();
        assert_eq!(r.value(), Ratio::new(1, 1));
        // blocks {B1: [m, m], B2: [m]} -> 3 txs over 2 groups
        let r = repeated_tx_rate([(1, "m"), (1, "m"), (2, "m")]).unwrap();
        assert_eq!(r.value(), Ratio::new(3, 2));
        assert!(repeated_tx_rate([]).is_none());
    }

    #[test]
    fn success_rate_boundaries_and_pooled_example() {
        assert_eq!(success_rate(10, 0).unwrap(), 1.0);
        assert_eq!(success_rate(0, 10).unwrap(), 0.0);
        assert!(matches!(success_rate(0, 0), Err(MetricsError::NoActivity)));
        // pooled chain-wide counts: 188,564 successes vs 670,258 failures
        let pooled = success_rate(188_564, 670_258).unwrap();
        assert!((pooled - 0.2196).abs() < 5e-5, "pooled={pooled}");
        // and the failure ratio those counts imply
        assert!((670_258.0_f64 / 188_564.0 - 3.55).abs() < 5e-3);
    }

    fn demo_clusters() -> Vec<SearcherCluster> {
        vec![
            SearcherCluster {
                searcher_id: "bot1".into(),
                senders: BTreeSet::from(["s1".into(), "s2".into()]),
                contracts: BTreeSet::from(["bot1".into()]),
            },
            SearcherCluster {
                searcher_id: "bot2".into(),
                senders: BTreeSet::from(["s9".into()]),
                contracts: BTreeSet::from(["bot2".into()]),
            },
        ]
    }

    #[test]
    fn stats_roll_up_per_searcher() {
        let arbs = vec![
            arb_record("s1", "bot1", 10, "m1", "uusd", 100, 110),
            arb_record("s2", "bot1", 10, "m1", "uusd", 100, 112),
            arb_record("s9", "bot2", 11, "m2", "uluna", 50, 51),
        ];
        let failed = vec![
            failed_record("s1", "bot1", 10, "m1"),
            failed_record("s9", "bot2", 12, "m3"),
        ];
        let stats = build_searcher_stats(&arbs, &failed, &demo_clusters()).unwrap();
        assert_eq!(stats.len(), 2);
        let b1 = &stats[0];
        assert_eq!(b1.searcher_id, "bot1");
        assert_eq!((b1.n_success, b1.n_failed), (2, 1));
        assert_eq!(b1.success_rate, 2.0 / 3.0);
        assert_eq!(b1.profit_by_token[&"uusd".to_string()], 22);
        assert_eq!(b1.n_senders, 2);
        assert_eq!(b1.n_contracts, 1);
        // three txs in block 10 all sharing msg m1: one group
        assert_eq!(b1.repeated_tx_rate.value(), Ratio::new(3, 1));
        assert_eq!(b1.gas_success, 1_000_000);
        assert_eq!(b1.gas_failed, 400_000);
        let b2 = &stats[1];
        assert_eq!(b2.repeated_tx_rate.value(), Ratio::new(1, 1));
        assert_eq!(b2.profit_by_token[&"uluna".to_string()], 1);
    }

    #[test]
    fn unclustered_records_stay_conserved() {
        let arbs = vec![arb_record("ghost", "nowhere", 5, "m", "uusd", 10, 12)];
        let stats = build_searcher_stats(&arbs, &[], &demo_clusters()).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].searcher_id, UNCLUSTERED);
        assert_eq!(stats[0].n_success, 1);
    }

    #[test]
    fn suite_filters_by_threshold_and_keeps_empty_rows() {
        // searcher k has k successes, profit 100-10k (anti-correlated),
        // repeated rate 1 + k/10 (positively correlated with success count).
        let stats: Vec<SearcherStats> = (1..=8u64)
            .map(|k| SearcherStats {
                searcher_id: format!("b{k}"),
                n_success: k,
                n_failed: 8 - k,
                success_rate: k as f64 / 8.0,
                profit_by_token: BTreeMap::from([("uusd".to_string(), (100 - 10 * k) as u128)]),
                n_contracts: 1,
                n_senders: 1,
                repeated_tx_rate: RepeatedRate { total: 10 + k, groups: 10 },
                gas_success: 0,
                gas_failed: 0,
            })
            .collect();
        let table = correlation_suite(&stats, &[0, 4, 100], None);
        assert_eq!(table.profit_token, "uusd");
        assert_eq!(table.rows[0].n, 8);
        assert_eq!(table.rows[1].n, 5);
        let row0 = &table.rows[0];
        assert!(row0.success_rate_vs_profit.unwrap().rho < -0.99);
        assert!(row0.repeated_rate_vs_profit.unwrap().rho < -0.99);
        assert!(row0.profit_vs_n_success.unwrap().rho < 0.0);
        assert!(row0.n_contracts_vs_n_success.is_none(), "zero variance column");
        let empty = &table.rows[2];
        assert_eq!(empty.n, 0);
        assert!(empty.success_rate_vs_profit.is_none());
    }

    #[test]
    fn per_block_correlation_sees_shared_bursts() {
        let mut arbs = Vec::new();
        let mut failed = Vec::new();
        for h in 0..30u64 {
            for i in 0..(h % 5) {
                arbs.push(arb_record("s1", "bot1", h, &format!("m{h}-{i}"), "uusd", 10, 12));
                failed.push(failed_record("s1", "bot1", h, &format!("m{h}-{i}")));
                failed.push(failed_record("s2", "bot1", h, &format!("m{h}-{i}x")));
            }
        }
        let r = block_failed_success_correlation(&arbs, &failed).unwrap();
        assert!(r.rho > 0.99, "bursts are perfectly shared, rho={}", r.rho);
    }

    proptest! {
        // Conservation: every record lands in exactly one stats row.
        #[test]
        fn totals_are_conserved(
            picks in prop::collection::vec((0usize..4, 0u64..6, 0u8..3, any::<bool>()), 1..60)
        ) {
            let senders = ["s1", "s2", "s9", "ghost"];
            let mut arbs = Vec::new();
            let mut failed = Vec::new();
            for (si, height, msg, success) in picks {
                let sender = senders[si];
                let contract = match sender {
                    "s1" | "s2" => "bot1",
                    "s9" => "bot2",
                    _ => "nowhere",
                };
                let m = format!("m{msg}");
                if success {
                    arbs.push(arb_record(sender, contract, height, &m, "uusd", 100, 101 + msg as u128));
                } else {
                    failed.push(failed_record(sender, contract, height, &m));
                }
            }
            let stats = build_searcher_stats(&arbs, &failed, &demo_clusters()).unwrap();
            prop_assert_eq!(stats.iter().map(|s| s.n_success).sum::<u64>(), arbs.len() as u64);
            prop_assert_eq!(stats.iter().map(|s| s.n_failed).sum::<u64>(), failed.len() as u64);
            // profit conservation per token
            let total: u128 = stats.iter().flat_map(|s| s.profit_by_token.values()).sum();
            prop_assert_eq!(total, arbs.iter().map(|a| a.profit).sum::<u128>());
            for s in &stats {
                if s.n_success + s.n_failed > 0 {
                    prop_assert!(s.repeated_tx_rate.value() >= Ratio::new(1, 1));
                }
            }
        }
    }
}
