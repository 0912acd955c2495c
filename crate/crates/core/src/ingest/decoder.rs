//! Payload decoding behind a trait, so the normalized pipeline is agnostic
//! to the wire encoding. The stock decoder understands the JSON payloads
//! used by the fixture format; a protobuf decoder for live chain data can
//! plug in without touching anything downstream.

use base64::Engine;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("payload is not valid base64")]
    Base64,
    #[error("payload is not valid utf-8")]
    Utf8,
    #[error("payload body unparseable: {0}")]
    Body(String),
}

/// One execute message extracted from a payload. A single transaction may
/// carry several.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecuteMsg {
    pub sender: String,
    pub contract: String,
    pub msg: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Execute(Vec<ExecuteMsg>),
    /// Parsed fine but carries no contract execute message (bank send,
    /// delegation, ...). Dropped from the normalized stream.
    NonExecute,
}

pub trait TxDecoder {
    fn decode(&self, payload_b64: &str) -> Result<Decoded, DecodeError>;
    fn name(&self) -> &'static str;
}

/// Decoder for the JSON payload convention: base64 over either a single
/// `{"sender","contract","execute_msg"}` object or `{"msgs":[...]}` for
/// multi-message transactions. An object without those keys (or with a null
/// `execute_msg`) is a non-execute transaction.
pub struct FixtureJsonDecoder;

#[derive(Deserialize)]
struct PayloadMsg {
    sender: Option<String>,
    contract: Option<String>,
    #[serde(default)]
    execute_msg: Value,
}

#[derive(Deserialize)]
struct PayloadBody {
    #[serde(default)]
    msgs: Option<Vec<PayloadMsg>>,
    #[serde(flatten)]
    single: PayloadMsg,
}

impl PayloadMsg {
    fn into_execute(self) -> Result<Option<ExecuteMsg>, DecodeError> {
        match (self.sender, self.contract, self.execute_msg) {
            (Some(sender), Some(contract), msg) if !msg.is_null() => {
                if !msg.is_object() {
                    return Err(DecodeError::Body("execute_msg must be an object".into()));
                }
                Ok(Some(ExecuteMsg { sender, contract, msg }))
            }
            _ => Ok(None),
        }
    }
}

impl TxDecoder for FixtureJsonDecoder {
    fn decode(&self, payload_b64: &str) -> Result<Decoded, DecodeError> {
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(payload_b64)
            .map_err(|_| DecodeError::Base64)?;
        let text = std::str::from_utf8(&bytes).map_err(|_| DecodeError::Utf8)?;
        let body: PayloadBody =
            serde_json::from_str(text).map_err(|e| DecodeError::Body(e.to_string()))?;
        let mut out = Vec::new();
        if let Some(msgs) = body.msgs {
            for m in msgs {
                if let Some(e) = m.into_execute()? {
                    out.push(e);
                }
            }
        } else if let Some(e) = body.single.into_execute()? {
            out.push(e);
        }
        if out.is_empty() { Ok(Decoded::NonExecute) } else { Ok(Decoded::Execute(out)) }
    }

    fn name(&self) -> &'static str {
        "fixture-json"
    }
}

/// Encode one execute message the way `FixtureJsonDecoder` expects.
pub fn encode_execute_payload(sender: &str, contract: &str, msg: &Value) -> String {
    let body = serde_json::json!({
        "sender": sender,
        "contract": contract,
        "execute_msg": super::canonical::canonicalize(msg),
    });
    base64::engine::general_purpose::STANDARD.encode(body.to_string())
}

/// Encode a non-execute transaction; `kind` is advisory.
pub fn encode_non_execute_payload(kind: &str, nonce: u64) -> String {
    let body = serde_json::json!({ "kind": kind, "nonce": nonce });
    base64::engine::general_purpose::STANDARD.encode(body.to_string())
}
