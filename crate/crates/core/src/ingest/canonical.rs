//! Canonical JSON form for execute messages.
//!
//! Two messages are "the same" when their canonical forms are byte-equal:
//! object keys sorted, compact separators, no float re-formatting games
//! (amounts are strings throughout, so numbers appearing here are small
//! integers). `msg_hash` is the sha256 of that byte form and is the
//! identity used for duplicate grouping.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Rebuild a value with all object keys in sorted order, recursively.
/// Arrays keep their element order.
pub fn canonicalize(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(&String, &Value)> = m.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            let mut out = Map::new();
            for (k, val) in entries {
                out.insert(k.clone(), canonicalize(val));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(canonicalize).collect()),
        other => other.clone(),
    }
}

/// Compact serialization of the canonical form.
pub fn canonical_json(v: &Value) -> String {
    serde_json::to_string(&canonicalize(v)).expect("canonical value serializes")
}

/// sha256 of the canonical form, lowercase hex.
pub fn msg_hash(v: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(v).as_bytes()))
}
