//! Cyclic arbitrage detection over extracted action sequences.
//!
//! A successful arbitrage is an action path where each swap's output token
//! feeds the next swap's input, the path closes back on its start token,
//! and strictly more comes out than went in. Fees don't enter the profit
//! comparison: gas is fixed-price on the chains this targets and is
//! accounted separately by the metrics layer.

use serde::{Deserialize, Serialize};

use crate::ingest::{canonical, NormalizedTx};
use crate::logparse::{extract_actions, Action, Extraction, MatcherRegistry};

/// Evidence that `actions` forms a profitable closed cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub token_start: String,
    #[serde(with = "crate::serde_util::u128_string")]
    pub amount_in: u128,
    #[serde(with = "crate::serde_util::u128_string")]
    pub amount_out: u128,
}

impl CycleSummary {
    pub fn profit(&self) -> u128 {
        self.amount_out - self.amount_in
    }
}

/// The cycle test, requiring at least two actions (one swap cannot close
/// a cycle of distinct tokens). `None` unless all three hold:
/// 1. chaining: `actions[i].token_out == actions[i+1].token_in`
/// 2. profit: final `amount_out` strictly above initial `amount_in`
/// 3. closure: final `token_out` equals `actions[0].token_in`
pub fn is_arbitrage(actions: &[Action]) -> Option<CycleSummary> {
    if actions.len() < 2 {
        return None;
    }
    for pair in actions.windows(2) {
        if pair[0].token_out != pair[1].token_in {
            return None;
        }
    }
    let first = &actions[0];
    let last = &actions[actions.len() - 1];
    if last.token_out != first.token_in {
        return None;
    }
    if last.amount_out <= first.amount_in {
        return None;
    }
    Some(CycleSummary {
        token_start: first.token_in.clone(),
        amount_in: first.amount_in,
        amount_out: last.amount_out,
    })
}

/// One confirmed arbitrage transaction, flat enough to stream as NDJSON.
/// `msg_hash` identifies the canonical execute message so duplicate
/// submissions group without re-reading the chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbitrageRecord {
    pub tx_hash: String,
    pub height: u64,
    pub index_in_block: u32,
    pub sender: String,
    pub contract: String,
    pub msg_hash: String,
    pub actions: Vec<Action>,
    pub token_start: String,
    #[serde(with = "crate::serde_util::u128_string")]
    pub amount_in: u128,
    #[serde(with = "crate::serde_util::u128_string")]
    pub amount_out: u128,
    #[serde(with = "crate::serde_util::u128_string")]
    pub profit: u128,
    pub path_length: u32,
    pub gas_used: u64,
}

/// How one normalized tx came out of classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// Executed and closed a profitable cycle.
    Success(Box<ArbitrageRecord>),
    /// Executed but no cycle: ordinary trading, transfers, unprofitable
    /// routes.
    NonArb,
    /// `code != 0`: burned gas, left no log. Candidate for the failed-
    /// attempt heuristic.
    Reverted,
}

#[derive(Debug)]
pub struct Classified {
    pub outcome: Classification,
    /// Present for executed txs; reverted txs have no log to extract from.
    pub extraction: Option<Extraction>,
}

pub fn classify(tx: &NormalizedTx, registry: &MatcherRegistry) -> Classified {
    if tx.code != 0 {
        return Classified { outcome: Classification::Reverted, extraction: None };
    }
    let extraction = extract_actions(tx, registry);
    let outcome = match is_arbitrage(&extraction.actions) {
        Some(cycle) => Classification::Success(Box::new(ArbitrageRecord {
            tx_hash: tx.tx_hash.clone(),
            height: tx.height,
            index_in_block: tx.index_in_block,
            sender: tx.sender.clone(),
            contract: tx.contract.clone(),
            msg_hash: canonical::msg_hash(&tx.execute_msg),
            actions: extraction.actions.clone(),
            token_start: cycle.token_start.clone(),
            amount_in: cycle.amount_in,
            amount_out: cycle.amount_out,
            profit: cycle.profit(),
            path_length: extraction.actions.len() as u32,
            gas_used: tx.gas_used,
        })),
        None => Classification::NonArb,
    };
    Classified { outcome, extraction: Some(extraction) }
}
