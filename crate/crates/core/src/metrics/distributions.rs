//! Distribution summaries feeding the report figures: block volumes, start
//! tokens, trade sizes, path lengths, pair usage and the profit-rate
//! histogram.
//!
//! Amounts stay u128 end to end; quantiles are order statistics (lower
//! median, no interpolation) so they are exact and serialize as decimal
//! strings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::BlockStat;
use crate::arbdetect::ArbitrageRecord;
use crate::failedarb::FailedArbRecord;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionOptions {
    /// Profit rates above 1 (doublings and better) are outliers that'd
    /// flatten the histogram; excluded unless asked for.
    pub include_profit_rate_outliers: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBucket {
    pub value: u64,
    pub blocks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVolume {
    pub n_blocks: u64,
    pub mean_txs: f64,
    pub median_txs: u64,
    pub p90_txs: u64,
    pub max_txs: u64,
    pub hist: Vec<CountBucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenShare {
    pub token: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Log10Bucket {
    /// Amounts with `exponent` = floor(log10(amount)), i.e. digit count − 1.
    pub exponent: u32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmountInSummary {
    pub count: u64,
    pub p25: String,
    pub p50: String,
    pub p75: String,
    pub log10_hist: Vec<Log10Bucket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathShare {
    pub length: u32,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCount {
    pub pair: String,
    pub uses: u64,
    /// Share of all action slots covered by this pair and every better-
    /// ranked one.
    pub cumulative_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairUsage {
    pub n_pairs: u64,
    pub total_uses: u64,
    pub ranked: Vec<PairCount>,
    pub top10_coverage: f64,
    pub top50_coverage: f64,
    pub top100_coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateBucket {
    /// Bin k covers [k/20, (k+1)/20); rates of exactly 1 land in bin 19.
    pub bin: u32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfitRateHist {
    pub bins: Vec<RateBucket>,
    pub above_one: u64,
    pub outliers_included: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopAddr {
    pub address: String,
    pub n_arbs: u64,
    pub counterparties: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub n_arbs: u64,
    pub n_failed: u64,
    pub block_volume: Option<BlockVolume>,
    /// Blocks carrying ≥1 arbitrage, bucketed by how many.
    pub arbs_per_block: Vec<CountBucket>,
    pub token_start: Vec<TokenShare>,
    pub amount_in: BTreeMap<String, AmountInSummary>,
    pub path_length: Vec<PathShare>,
    pub pair_usage: PairUsage,
    pub profit_rate: ProfitRateHist,
    pub top_senders: Vec<TopAddr>,
    pub top_contracts: Vec<TopAddr>,
}

/// Lower order statistic at fraction `q` of the way through.
fn order_stat<T: Copy>(sorted: &[T], num: usize, den: usize) -> T {
    sorted[(sorted.len() - 1) * num / den]
}

fn count_hist(values: impl Iterator<Item = u64>) -> Vec<CountBucket> {
    let mut m: BTreeMap<u64, u64> = BTreeMap::new();
    for v in values {
        *m.entry(v).or_insert(0) += 1;
    }
    m.into_iter().map(|(value, blocks)| CountBucket { value, blocks }).collect()
}

fn top_addrs<'a>(
    records: impl Iterator<Item = (&'a str, &'a str)>,
    total: u64,
) -> Vec<TopAddr> {
    let mut counts: BTreeMap<&str, (u64, BTreeSet<&str>)> = BTreeMap::new();
    for (addr, counterparty) in records {
        let e = counts.entry(addr).or_default();
        e.0 += 1;
        e.1.insert(counterparty);
    }
    let mut rows: Vec<TopAddr> = counts
        .into_iter()
        .map(|(address, (n_arbs, cps))| TopAddr {
            address: address.to_string(),
            n_arbs,
            counterparties: cps.len() as u64,
            share: n_arbs as f64 / total.max(1) as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.n_arbs.cmp(&a.n_arbs).then(a.address.cmp(&b.address)));
    rows.truncate(10);
    rows
}

pub fn distributions(
    arbs: &[ArbitrageRecord],
    failed: &[FailedArbRecord],
    blocks: Option<&[BlockStat]>,
    opts: DistributionOptions,
) -> DistributionReport {
    let n_arbs = arbs.len() as u64;

    let block_volume = blocks.filter(|b| !b.is_empty()).map(|blocks| {
        let mut txs: Vec<u64> = blocks.iter().map(|b| b.txs).collect();
        txs.sort_unstable();
        BlockVolume {
            n_blocks: blocks.len() as u64,
            mean_txs: txs.iter().sum::<u64>() as f64 / txs.len() as f64,
            median_txs: order_stat(&txs, 1, 2),
            p90_txs: order_stat(&txs, 9, 10),
            max_txs: *txs.last().expect("nonempty"),
            hist: count_hist(txs.iter().copied()),
        }
    });

    let mut arbs_by_block: BTreeMap<u64, u64> = BTreeMap::new();
    for r in arbs {
        *arbs_by_block.entry(r.height).or_insert(0) += 1;
    }
    let arbs_per_block = count_hist(arbs_by_block.values().copied());

    let mut token_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in arbs {
        *token_counts.entry(&r.token_start).or_insert(0) += 1;
    }
    let mut token_start: Vec<TokenShare> = token_counts
        .into_iter()
        .map(|(token, count)| TokenShare {
            token: token.to_string(),
            count,
            share: count as f64 / n_arbs.max(1) as f64,
        })
        .collect();
    token_start.sort_by(|a, b| b.count.cmp(&a.count).then(a.token.cmp(&b.token)));

    let mut amounts_by_token: BTreeMap<&str, Vec<u128>> = BTreeMap::new();
    for r in arbs {
        amounts_by_token.entry(&r.token_start).or_default().push(r.amount_in);
    }
    let amount_in = amounts_by_token
        .into_iter()
        .map(|(token, mut v)| {
            v.sort_unstable();
            let mut hist: BTreeMap<u32, u64> = BTreeMap::new();
            for a in &v {
                *hist.entry(a.checked_ilog10().unwrap_or(0)).or_insert(0) += 1;
            }
            let summary = AmountInSummary {
                count: v.len() as u64,
                p25: order_stat(&v, 1, 4).to_string(),
                p50: order_stat(&v, 1, 2).to_string(),
                p75: order_stat(&v, 3, 4).to_string(),
                log10_hist: hist
                    .into_iter()
                    .map(|(exponent, count)| Log10Bucket { exponent, count })
                    .collect(),
            };
            (token.to_string(), summary)
        })
        .collect();

    let mut path_counts: BTreeMap<u32, u64> = BTreeMap::new();
    for r in arbs {
        *path_counts.entry(r.path_length).or_insert(0) += 1;
    }
    let path_length = path_counts
        .into_iter()
        .map(|(length, count)| PathShare {
            length,
            count,
            share: count as f64 / n_arbs.max(1) as f64,
        })
        .collect();

    let mut pair_counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut total_uses = 0u64;
    for r in arbs {
        for a in &r.actions {
            *pair_counts.entry(&a.pair_address).or_insert(0) += 1;
            total_uses += 1;
        }
    }
    let mut ranked_raw: Vec<(&str, u64)> = pair_counts.into_iter().collect();
    ranked_raw.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let mut running = 0u64;
    let ranked: Vec<PairCount> = ranked_raw
        .iter()
        .map(|(pair, uses)| {
            running += uses;
            PairCount {
                pair: pair.to_string(),
                uses: *uses,
                cumulative_share: running as f64 / total_uses.max(1) as f64,
            }
        })
        .collect();
    let coverage = |k: usize| -> f64 {
        if ranked.is_empty() {
            0.0
        } else {
            ranked[ranked.len().min(k) - 1].cumulative_share
        }
    };
    let pair_usage = PairUsage {
        n_pairs: ranked.len() as u64,
        total_uses,
        top10_coverage: coverage(10),
        top50_coverage: coverage(50),
        top100_coverage: coverage(100),
        ranked,
    };

    let mut bins: BTreeMap<u32, u64> = BTreeMap::new();
    let mut above_one = 0u64;
    for r in arbs {
        if r.profit > r.amount_in && !opts.include_profit_rate_outliers {
            above_one += 1;
            continue;
        }
        // exact: floor(20·profit/amount_in), capped so rate == 1 stays in
        // the last in-range bin. Outliers (when included) cap there too.
        let idx = if r.profit > r.amount_in {
            above_one += 1;
            19
        } else {
            ((r.profit.saturating_mul(20) / r.amount_in) as u32).min(19)
        };
        *bins.entry(idx).or_insert(0) += 1;
    }
    let profit_rate = ProfitRateHist {
        bins: bins.into_iter().map(|(bin, count)| RateBucket { bin, count }).collect(),
        above_one,
        outliers_included: opts.include_profit_rate_outliers,
    };

    let top_senders = top_addrs(arbs.iter().map(|r| (r.sender.as_str(), r.contract.as_str())), n_arbs);
    let top_contracts = top_addrs(arbs.iter().map(|r| (r.contract.as_str(), r.sender.as_str())), n_arbs);

    DistributionReport {
        n_arbs,
        n_failed: failed.len() as u64,
        block_volume,
        arbs_per_block,
        token_start,
        amount_in,
        path_length,
        pair_usage,
        profit_rate,
        top_senders,
        top_contracts,
    }
}
