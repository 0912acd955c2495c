//! Failed-attempt heuristic for reverted transactions.
//!
//! A reverted tx leaves no execution log, so intent has to be inferred
//! from circumstance. Three conditions, each grounded in the successful
//! record:
//!   1. the sender also signed at least one successful arbitrage,
//!   2. the target contract executed at least one successful arbitrage,
//!   3. the execute message's shape matches a successful arbitrage message
//!      sent to the same contract.
//!
//! Any-of is the default read; all-of is the conservative lower bound.
//! All-of matches are by construction a subset of any-of matches.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arbdetect::ArbitrageRecord;
use crate::ingest::{canonical, NormalizedTx};

#[derive(Debug, Error)]
pub enum FailedArbError {
    #[error("tx {0} executed successfully; the heuristic only applies to reverted txs")]
    NotReverted(String),
}

/// Value-erased structure of an execute message: key paths survive, leaf
/// values disappear. Two messages have the same shape when the same keys
/// nest the same way, array contents reduced to their element shapes in
/// order.
pub fn shape_fingerprint(msg: &Value) -> String {
    fn erase(v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                let mut keys: Vec<&String> = m.keys().collect();
                keys.sort();
                out.push('{');
                for k in keys {
                    out.push_str(k);
                    out.push(':');
                    erase(&m[k.as_str()], out);
                    out.push(',');
                }
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for item in items {
                    erase(item, out);
                    out.push(',');
                }
                out.push(']');
            }
            // Every leaf erases to the same mark: amounts, addresses and
            // flags all vary between attempts at the same opportunity.
            _ => out.push('.'),
        }
    }
    let mut s = String::new();
    erase(&canonical::canonicalize(msg), &mut s);
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// The success-side evidence the heuristic consults. Built once from the
/// detected arbitrages, then queried per reverted tx. Mergeable, so shards
/// of a range can be combined.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearcherSignatures {
    arb_senders: BTreeSet<String>,
    arb_contracts: BTreeSet<String>,
    /// (contract, shape fingerprint) of successful arbitrage messages.
    msg_shapes: BTreeSet<(String, String)>,
}

impl SearcherSignatures {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one successful arbitrage and its execute message.
    pub fn insert(&mut self, record: &ArbitrageRecord, execute_msg: &Value) {
        self.arb_senders.insert(record.sender.clone());
        self.arb_contracts.insert(record.contract.clone());
        self.msg_shapes.insert((record.contract.clone(), shape_fingerprint(execute_msg)));
    }

    /// Build from records plus a message lookup (records don't embed the
    /// full message, only its hash).
    pub fn build<'a>(
        records: impl IntoIterator<Item = &'a ArbitrageRecord>,
        mut lookup_msg: impl FnMut(&ArbitrageRecord) -> Option<Value>,
    ) -> Self {
        let mut sig = Self::new();
        for r in records {
            if let Some(msg) = lookup_msg(r) {
                sig.insert(r, &msg);
            } else {
                sig.arb_senders.insert(r.sender.clone());
                sig.arb_contracts.insert(r.contract.clone());
            }
        }
        sig
    }

    pub fn merge(&mut self, other: SearcherSignatures) {
        self.arb_senders.extend(other.arb_senders);
        self.arb_contracts.extend(other.arb_contracts);
        self.msg_shapes.extend(other.msg_shapes);
    }

    pub fn is_empty(&self) -> bool {
        self.arb_senders.is_empty() && self.arb_contracts.is_empty() && self.msg_shapes.is_empty()
    }

    pub fn known_sender(&self, sender: &str) -> bool {
        self.arb_senders.contains(sender)
    }

    pub fn known_contract(&self, contract: &str) -> bool {
        self.arb_contracts.contains(contract)
    }

    pub fn known_shape(&self, contract: &str, msg: &Value) -> bool {
        self.msg_shapes.contains(&(contract.to_string(), shape_fingerprint(msg)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Flag when at least one condition holds (default).
    #[default]
    AnyOf,
    /// Flag only when all three hold.
    AllOf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Sender,
    Contract,
    MsgShape,
}

/// One reverted tx flagged as a failed arbitrage attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedArbRecord {
    pub tx_hash: String,
    pub height: u64,
    pub index_in_block: u32,
    pub sender: String,
    pub contract: String,
    pub msg_hash: String,
    pub matched_conditions: BTreeSet<Condition>,
    pub gas_used: u64,
}

/// Apply the heuristic to one reverted tx. `Ok(None)` means "reverted but
/// nothing ties it to arbitrage"; executing txs are a caller bug.
pub fn is_failed_arbitrage(
    tx: &NormalizedTx,
    signatures: &SearcherSignatures,
    mode: MatchMode,
) -> Result<Option<FailedArbRecord>, FailedArbError> {
    if tx.code == 0 {
        return Err(FailedArbError::NotReverted(tx.tx_hash.clone()));
    }
    let mut matched = BTreeSet::new();
    if signatures.known_sender(&tx.sender) {
        matched.insert(Condition::Sender);
    }
    if signatures.known_contract(&tx.contract) {
        matched.insert(Condition::Contract);
    }
    if signatures.known_shape(&tx.contract, &tx.execute_msg) {
        matched.insert(Condition::MsgShape);
    }
    let flag = match mode {
        MatchMode::AnyOf => !matched.is_empty(),
        MatchMode::AllOf => matched.len() == 3,
    };
    Ok(flag.then(|| FailedArbRecord {
        tx_hash: tx.tx_hash.clone(),
        height: tx.height,
        index_in_block: tx.index_in_block,
        sender: tx.sender.clone(),
        contract: tx.contract.clone(),
        msg_hash: canonical::msg_hash(&tx.execute_msg),
        matched_conditions: matched,
        gas_used: tx.gas_used,
    }))
}
