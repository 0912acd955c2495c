//! Turning wasm execution logs into swap actions.
//!
//! A tx's events flatten into attribute *runs*: each `_contract_address`
//! (or legacy `contract_address`) key starts a new run owned by that
//! contract, carrying the attributes up to the next delimiter. Pattern
//! matchers walk the run sequence; each matcher either consumes one or
//! more adjacent runs into an [`Action`] or passes. Nothing is ever
//! invented: every action's amounts and tokens come verbatim from run
//! attributes (or the run's own contract address).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{LogEvent, NormalizedTx};

#[derive(Debug, Error)]
pub enum LogParseError {
    #[error("matcher {0:?} registered twice")]
    DuplicateMatcher(String),
    #[error("unknown matcher {0:?} in config")]
    UnknownMatcher(String),
    #[error("matcher config unreadable: {0}")]
    Config(String),
}

/// One token swap: `amount_in` of `token_in` entered `pair_address`,
/// `amount_out` of `token_out` came back out.
///
/// Invariants: both amounts positive, tokens distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub pair_address: String,
    pub token_in: String,
    pub token_out: String,
    #[serde(with = "crate::serde_util::u128_string")]
    pub amount_in: u128,
    #[serde(with = "crate::serde_util::u128_string")]
    pub amount_out: u128,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("amount for {token:?} is zero or not a positive integer: {raw:?}")]
    BadAmount { token: String, raw: String },
    #[error("token in and out are both {0:?}")]
    SameToken(String),
}

impl Action {
    pub fn new(
        pair_address: impl Into<String>,
        token_in: impl Into<String>,
        token_out: impl Into<String>,
        amount_in: u128,
        amount_out: u128,
    ) -> Result<Self, ActionError> {
        let (token_in, token_out) = (token_in.into(), token_out.into());
        if token_in == token_out {
            return Err(ActionError::SameToken(token_in));
        }
        for (token, amount) in [(&token_in, amount_in), (&token_out, amount_out)] {
            if amount == 0 {
                return Err(ActionError::BadAmount { token: token.clone(), raw: "0".into() });
            }
        }
        Ok(Action { pair_address: pair_address.into(), token_in, token_out, amount_in, amount_out })
    }
}

/// A contiguous attribute span owned by one contract within a tx log.
#[derive(Debug, Clone, Copy)]
pub struct AttributeRun<'a> {
    pub contract: &'a str,
    pub attrs: &'a [(String, String)],
}

impl<'a> AttributeRun<'a> {
    /// First value for `key` within the run.
    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn action(&self) -> Option<&'a str> {
        self.get("action")
    }
}

const RUN_DELIMITERS: [&str; 2] = ["_contract_address", "contract_address"];

/// Split a tx's wasm events into runs. Non-wasm events and attributes
/// before the first delimiter carry no contract identity and are dropped.
pub fn split_runs(events: &[LogEvent]) -> Vec<AttributeRun<'_>> {
    let mut runs = Vec::new();
    for ev in events {
        if ev.event_type != "wasm" {
            continue;
        }
        let mut start = None::<(usize, &str)>;
        for (i, (k, v)) in ev.attributes.iter().enumerate() {
            if RUN_DELIMITERS.contains(&k.as_str()) {
                if let Some((s, contract)) = start {
                    runs.push(AttributeRun { contract, attrs: &ev.attributes[s..i] });
                }
                start = Some((i + 1, v.as_str()));
            }
        }
        if let Some((s, contract)) = start {
            runs.push(AttributeRun { contract, attrs: &ev.attributes[s..] });
        }
    }
    runs
}

/// What a matcher did with the runs starting at position 0 of its view.
#[derive(Debug)]
pub enum MatchOutcome {
    /// Not this matcher's shape; leave the run for the next matcher.
    NoMatch,
    Matched { action: Action, runs_consumed: usize },
    /// Shape recognized but contents unusable (zero/garbled amounts,
    /// identical tokens). The runs are consumed, the tx gets a warning.
    Inconsistent { runs_consumed: usize, reason: String },
}

pub trait PatternMatcher: Send + Sync {
    fn name(&self) -> &'static str;
    /// Inspect `runs[0..]` and decide. A matcher may look ahead at later
    /// runs but consumes only a prefix.
    fn try_match(&self, runs: &[AttributeRun<'_>]) -> MatchOutcome;
}

/// Ordered matcher registry; first match wins per run position.
pub struct MatcherRegistry {
    matchers: Vec<Box<dyn PatternMatcher>>,
}

impl fmt::Debug for MatcherRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.matchers.iter().map(|m| m.name())).finish()
    }
}

impl Default for MatcherRegistry {
    fn default() -> Self {
        let mut reg = MatcherRegistry::empty();
        reg.register(Box::new(SwapMatcher)).expect("fresh registry");
        reg.register(Box::new(MintBurnMatcher)).expect("fresh registry");
        reg
    }
}

impl MatcherRegistry {
    pub fn empty() -> Self {
        MatcherRegistry { matchers: Vec::new() }
    }

    pub fn register(&mut self, m: Box<dyn PatternMatcher>) -> Result<(), LogParseError> {
        if self.matchers.iter().any(|x| x.name() == m.name()) {
            return Err(LogParseError::DuplicateMatcher(m.name().into()));
        }
        self.matchers.push(m);
        Ok(())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.matchers.iter().map(|m| m.name()).collect()
    }

    fn by_name(name: &str) -> Result<Box<dyn PatternMatcher>, LogParseError> {
        match name {
            "swap" => Ok(Box::new(SwapMatcher)),
            "mint_burn" => Ok(Box::new(MintBurnMatcher)),
            other => Err(LogParseError::UnknownMatcher(other.into())),
        }
    }

    /// Build from a config listing matcher names in priority order:
    /// `{"matchers": ["swap", "mint_burn"]}` as JSON, or the TOML
    /// equivalent. Extension decides the format.
    pub fn from_config_file(path: &Path) -> Result<Self, LogParseError> {
        let raw = std::fs::read_to_string(path).map_err(|e| LogParseError::Config(e.to_string()))?;
        let toml_like = path.extension().is_some_and(|e| e == "toml");
        Self::from_config_str(&raw, toml_like)
    }

    pub fn from_config_str(raw: &str, toml_like: bool) -> Result<Self, LogParseError> {
        #[derive(Deserialize)]
        struct Cfg {
            matchers: Vec<String>,
        }
        let cfg: Cfg = if toml_like {
            toml::from_str(raw).map_err(|e| LogParseError::Config(e.to_string()))?
        } else {
            serde_json::from_str(raw).map_err(|e| LogParseError::Config(e.to_string()))?
        };
        let mut reg = MatcherRegistry::empty();
        for name in &cfg.matchers {
            reg.register(Self::by_name(name)?)?;
        }
        Ok(reg)
    }
}

/// Everything extracted from one tx log.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct Extraction {
    pub actions: Vec<Action>,
    /// Runs no matcher claimed (unknown hook shapes, transfers, ...).
    pub unmatched_runs: u32,
    /// Human-readable notes for consumed-but-unusable runs.
    pub warnings: Vec<String>,
}

/// Walk the tx's runs through the registry, in log order.
pub fn extract_actions(tx: &NormalizedTx, registry: &MatcherRegistry) -> Extraction {
    debug_assert_eq!(tx.code, 0, "reverted txs have no runs to extract");
    let runs = split_runs(&tx.events);
    let mut out = Extraction::default();
    let mut i = 0;
    'outer: while i < runs.len() {
        for m in &registry.matchers {
            match m.try_match(&runs[i..]) {
                MatchOutcome::NoMatch => continue,
                MatchOutcome::Matched { action, runs_consumed } => {
                    debug_assert!(runs_consumed >= 1);
                    out.actions.push(action);
                    i += runs_consumed.max(1);
                    continue 'outer;
                }
                MatchOutcome::Inconsistent { runs_consumed, reason } => {
                    out.warnings.push(format!("{} at run {i}: {reason}", m.name()));
                    i += runs_consumed.max(1);
                    continue 'outer;
                }
            }
        }
        out.unmatched_runs += 1;
        i += 1;
    }
    out
}

fn parse_amount(run: &AttributeRun<'_>, key: &str, token: &str) -> Result<u128, ActionError> {
    let raw = run.get(key).unwrap_or("");
    match raw.parse::<u128>() {
        // Round-trip comparison rejects non-canonical forms ("007", "+5").
        Ok(v) if v > 0 && v.to_string() == raw => Ok(v),
        _ => Err(ActionError::BadAmount { token: token.into(), raw: raw.into() }),
    }
}

/// Constant-product pool swaps: one run holding `action=swap` with
/// offer/ask assets and amounts. The run's contract is the pair.
pub struct SwapMatcher;

impl PatternMatcher for SwapMatcher {
    fn name(&self) -> &'static str {
        "swap"
    }

    fn try_match(&self, runs: &[AttributeRun<'_>]) -> MatchOutcome {
        let run = &runs[0];
        if run.action() != Some("swap") {
            return MatchOutcome::NoMatch;
        }
        let fields = ["offer_asset", "ask_asset", "offer_amount", "return_amount"];
        if fields.iter().any(|f| run.get(f).is_none()) {
            // action=swap without the pool fields: some routers log a bare
            // swap marker before the pool's own run. Not a pool swap.
            return MatchOutcome::NoMatch;
        }
        let offer = run.get("offer_asset").unwrap_or_default();
        let ask = run.get("ask_asset").unwrap_or_default();
        let matched = (|| {
            let amount_in = parse_amount(run, "offer_amount", offer)?;
            let amount_out = parse_amount(run, "return_amount", ask)?;
            Action::new(run.contract, offer, ask, amount_in, amount_out)
        })();
        match matched {
            Ok(action) => MatchOutcome::Matched { action, runs_consumed: 1 },
            Err(e) => MatchOutcome::Inconsistent { runs_consumed: 1, reason: e.to_string() },
        }
    }
}

/// Wrapped-asset venues that burn the inbound token and mint the outbound
/// one: a burn run immediately followed by a mint run. Token identity is
/// the explicit `asset` attribute when present, else the executing
/// contract (cw20 burns/mints run on the token contract itself). The pair
/// address is the minting contract.
pub struct MintBurnMatcher;

impl PatternMatcher for MintBurnMatcher {
    fn name(&self) -> &'static str {
        "mint_burn"
    }

    fn try_match(&self, runs: &[AttributeRun<'_>]) -> MatchOutcome {
        let burn = &runs[0];
        if burn.action() != Some("burn") {
            return MatchOutcome::NoMatch;
        }
        let Some(mint) = runs.get(1) else { return MatchOutcome::NoMatch };
        if mint.action() != Some("mint") {
            return MatchOutcome::NoMatch;
        }
        let token_in = burn.get("asset").unwrap_or(burn.contract);
        let token_out = mint.get("asset").unwrap_or(mint.contract);
        let matched = (|| {
            let amount_in = parse_amount(burn, "amount", token_in)?;
            let amount_out = parse_amount(mint, "amount", token_out)?;
            Action::new(mint.contract, token_in, token_out, amount_in, amount_out)
        })();
        match matched {
            Ok(action) => MatchOutcome::Matched { action, runs_consumed: 2 },
            Err(e) => MatchOutcome::Inconsistent { runs_consumed: 2, reason: e.to_string() },
        }
    }
}
