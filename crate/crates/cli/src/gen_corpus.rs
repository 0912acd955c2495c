//! `latwar gen-corpus`: synthetic block fixtures with known ground truth.
//!
//! Two profile kinds. `detect` plants cyclic arbitrages and failed
//! attempts in a sea of ordinary traffic: routed swaps that don't close,
//! cycles that close at a loss, transfers, liquidity ops, user reverts.
//! `population` builds a roster of searchers running 1..=N instances each,
//! with win counts, failure ratios and duplicate submissions that all
//! scale with instance count, so the downstream correlation table has a
//! known sign structure.
//!
//! Everything derives from (seed, label, index) through splitmix64 into a
//! per-item ChaCha8 stream, so corpora are reproducible item by item and
//! insensitive to generation order. Addresses and tx hashes come from
//! sha256 over labels: stable, unique, and shaped like the real thing.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use clap::Args;
use latwar_core::ingest::fixtures::FixtureWriter;
use latwar_core::ingest::{FixtureBlock, FixtureTx, LogEvent};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::meta::{ensure_dir, write_json_pretty, RunMeta};
use crate::{usage, CmdResult};

#[derive(Args)]
pub(crate) struct GenCorpusArgs {
    /// Corpus profile (JSON; `kind` selects detect or population)
    #[arg(long)]
    profile: PathBuf,
    /// Generator seed; same profile + seed reproduces the corpus exactly
    #[arg(long)]
    seed: u64,
    /// Output directory (blocks/, ground_truth.json, matchers.json,
    /// meta.json)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Profile {
    Detect(DetectProfile),
    Population(PopulationProfile),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectProfile {
    n_blocks: u64,
    #[serde(default = "one")]
    start_height: u64,
    n_arbs: u64,
    n_failed: u64,
    n_noise_executed: u64,
    n_noise_reverted: u64,
    #[serde(default)]
    n_non_execute: u64,
    #[serde(default = "default_searchers")]
    n_searchers: u32,
    /// Start-token weights, apportioned exactly over n_arbs.
    token_split: BTreeMap<String, f64>,
    /// Cycle-length weights keyed by length (2..=6 sensible). Keys are
    /// strings because JSON object keys are.
    path_length_weights: BTreeMap<String, f64>,
    /// Share of cycles (length >= 3) that route one hop through a
    /// burn/mint venue instead of a pool swap.
    #[serde(default = "default_mint_burn_share")]
    mint_burn_share: f64,
    /// Share of the all-conditions failed attempts that are byte-identical
    /// resubmissions of a planted win, landing in the same block.
    #[serde(default = "default_duplicate_share")]
    duplicate_share: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationProfile {
    n_searchers: u32,
    max_instances: u32,
    wins_per_instance: u64,
    /// Failed attempts per win at one instance.
    fail_base: f64,
    /// Extra failed attempts per win per additional instance.
    fail_slope: f64,
    /// Duplicate probability at max_instances; scales linearly from 0 at
    /// one instance.
    duplicate_max: f64,
    #[serde(default = "default_txs_per_block")]
    txs_per_block: u64,
    #[serde(default = "one")]
    start_height: u64,
    #[serde(default)]
    n_noise_executed: u64,
    #[serde(default)]
    n_noise_reverted: u64,
}

fn one() -> u64 {
    1
}
fn default_searchers() -> u32 {
    16
}
fn default_mint_burn_share() -> f64 {
    0.15
}
fn default_duplicate_share() -> f64 {
    0.3
}
fn default_txs_per_block() -> u64 {
    40
}

pub(crate) fn run(args: GenCorpusArgs) -> CmdResult {
    let raw = std::fs::read_to_string(&args.profile)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", args.profile.display()))?;
    let profile: Profile = serde_json::from_str(&raw)
        .map_err(|e| usage(format!("--profile {}: {e}", args.profile.display())))?;

    ensure_dir(&args.out.join("blocks"))?;
    let (blocks, truth) = match &profile {
        Profile::Detect(p) => gen_detect(p, args.seed)?,
        Profile::Population(p) => gen_population(p, args.seed)?,
    };

    let mut fixture_txs = 0u64;
    let mut execute_msgs = 0u64;
    for (i, chunk) in blocks.chunks(50).enumerate() {
        let path = args.out.join(format!("blocks/batch-{i:04}.ndjson"));
        let file = std::fs::File::create(&path)
            .map_err(|e| anyhow::anyhow!("creating {}: {e}", path.display()))?;
        let mut w = FixtureWriter::new(std::io::BufWriter::new(file));
        for block in chunk {
            fixture_txs += block.txs.len() as u64;
            execute_msgs += block.txs.iter().filter(|t| t.execute_msg.is_some()).count() as u64;
            w.write_block(block)?;
        }
        use std::io::Write;
        w.into_inner().flush()?;
    }

    write_json_pretty(&args.out.join("ground_truth.json"), &truth)?;
    write_json_pretty(&args.out.join("matchers.json"), &json!({"matchers": ["swap", "mint_burn"]}))?;
    RunMeta::new("gen-corpus")
        .seed(args.seed)
        .config_file(&args.profile)?
        .arg("profile", args.profile.display())
        .stat("blocks", blocks.len() as u64)
        .stat("fixture_txs", fixture_txs)
        .stat("execute_msgs", execute_msgs)
        .stat("planted_arbs", truth.planted_arbs.len() as u64)
        .stat("planted_failed", truth.planted_failed.len() as u64)
        .write(&args.out)?;
    log::info!(
        "{} blocks, {} txs, {} arbs, {} failed",
        blocks.len(),
        fixture_txs,
        truth.planted_arbs.len(),
        truth.planted_failed.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct GroundTruth {
    kind: &'static str,
    seed: u64,
    n_blocks: u64,
    /// Normalized execute messages the pipeline will see.
    n_txs: u64,
    planted_arbs: Vec<PlantedArb>,
    planted_failed: Vec<PlantedFail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    searchers: Option<Vec<SearcherTruth>>,
}

#[derive(Serialize)]
struct PlantedArb {
    tx_hash: String,
    token_start: String,
    path_length: u32,
    /// amount_out - amount_in, micro units of token_start.
    profit: String,
}

#[derive(Serialize)]
struct PlantedFail {
    tx_hash: String,
    /// Which heuristic conditions hold: "sender_contract_shape" (all
    /// three), "contract_shape", or "sender".
    category: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    duplicate_of: Option<String>,
}

#[derive(Serialize)]
struct SearcherTruth {
    expected_id: String,
    n_instances: u32,
    wins: u64,
    fails: u64,
    duplicate_fails: u64,
}

const CATEGORY_ALL: &str = "sender_contract_shape";
const CATEGORY_CONTRACT_SHAPE: &str = "contract_shape";
const CATEGORY_SENDER: &str = "sender";

// ---------------------------------------------------------------------
// deterministic primitives

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent RNG stream for one generated item.
fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for b in label.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    ChaCha8Rng::seed_from_u64(splitmix64(h ^ index))
}

fn sha_hex(label: &str) -> String {
    hex::encode(Sha256::digest(label.as_bytes()))
}

const BECH32: &[u8; 32] = b"qpzry9x8gf2tvdw0s3jn54khce6mua7l";

/// Deterministic bech32-shaped account/contract address.
fn terra_addr(kind: &str, n: u64) -> String {
    let d1 = Sha256::digest(format!("addr:{kind}:{n}").as_bytes());
    let d2 = Sha256::digest(d1);
    let mut s = String::from("terra1");
    for b in d1.iter().chain(d2.iter()).take(38) {
        s.push(BECH32[(*b as usize) % 32] as char);
    }
    s
}

/// Largest-remainder apportionment: exact integer counts proportional to
/// the weights, summing to `total`.
fn apportion<K: Clone>(total: u64, weights: &[(K, f64)]) -> Vec<(K, u64)> {
    let sum: f64 = weights.iter().map(|(_, w)| w).sum();
    assert!(sum > 0.0, "apportion needs positive weights");
    let mut rows: Vec<(usize, u64, f64)> = weights
        .iter()
        .enumerate()
        .map(|(i, (_, w))| {
            let exact = total as f64 * w / sum;
            (i, exact.floor() as u64, exact - exact.floor())
        })
        .collect();
    let assigned: u64 = rows.iter().map(|r| r.1).sum();
    rows.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)));
    for row in rows.iter_mut().take((total - assigned) as usize) {
        row.1 += 1;
    }
    rows.sort_by_key(|r| r.0);
    rows.into_iter().map(|(i, n, _)| (weights[i].0.clone(), n)).collect()
}

fn expand<K: Clone>(counts: &[(K, u64)]) -> Vec<K> {
    let mut out = Vec::new();
    for (k, n) in counts {
        out.extend(std::iter::repeat_n(k.clone(), *n as usize));
    }
    out
}

fn weighted_pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let sum: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * sum;
    for (i, w) in weights.iter().enumerate() {
        x -= w;
        if x < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Consistent pool addressing: one pair contract per unordered token pair,
/// one venue per ordered burn/mint direction.
#[derive(Default)]
struct PairBook {
    pairs: BTreeMap<(String, String), String>,
    venues: BTreeMap<(String, String), String>,
}

impl PairBook {
    fn pair(&mut self, a: &str, b: &str) -> String {
        let key =
            if a <= b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        let n = self.pairs.len() as u64;
        self.pairs.entry(key).or_insert_with(|| terra_addr("pair", n)).clone()
    }

    fn venue(&mut self, from: &str, to: &str) -> String {
        let n = self.venues.len() as u64;
        self.venues
            .entry((from.to_string(), to.to_string()))
            .or_insert_with(|| terra_addr("venue", n))
            .clone()
    }
}

// ---------------------------------------------------------------------
// event and message construction

enum Hop {
    Swap { pair: String, token_in: String, token_out: String, amount_in: u128, amount_out: u128 },
    MintBurn { venue: String, token_in: String, token_out: String, amount_in: u128, amount_out: u128 },
}

fn wasm_event(attrs: Vec<(String, String)>) -> LogEvent {
    LogEvent { event_type: "wasm".into(), attributes: attrs }
}

fn attr(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

/// One wasm event holding the route's attribute runs, optionally preceded
/// by the router's own marker run (which no matcher claims).
fn route_events(router_marker: Option<&str>, hops: &[Hop]) -> Vec<LogEvent> {
    let mut attrs = Vec::new();
    if let Some(router) = router_marker {
        attrs.push(attr("_contract_address", router));
        attrs.push(attr("action", "execute_route"));
    }
    for hop in hops {
        match hop {
            Hop::Swap { pair, token_in, token_out, amount_in, amount_out } => {
                attrs.push(attr("_contract_address", pair.as_str()));
                attrs.push(attr("action", "swap"));
                attrs.push(attr("offer_asset", token_in.as_str()));
                attrs.push(attr("ask_asset", token_out.as_str()));
                attrs.push(attr("offer_amount", amount_in.to_string()));
                attrs.push(attr("return_amount", amount_out.to_string()));
            }
            Hop::MintBurn { venue, token_in, token_out, amount_in, amount_out } => {
                attrs.push(attr("_contract_address", token_in.as_str()));
                attrs.push(attr("action", "burn"));
                attrs.push(attr("asset", token_in.as_str()));
                attrs.push(attr("amount", amount_in.to_string()));
                attrs.push(attr("_contract_address", venue.as_str()));
                attrs.push(attr("action", "mint"));
                attrs.push(attr("asset", token_out.as_str()));
                attrs.push(attr("amount", amount_out.to_string()));
            }
        }
    }
    vec![wasm_event(attrs)]
}

/// The router execute message a searcher submits for a route. Leaf values
/// vary per call; the key structure is the searcher's signature shape.
fn route_msg(hops: &[Hop], amount_in: u128, min_receive: u128) -> Value {
    let route: Vec<Value> = hops
        .iter()
        .map(|h| match h {
            Hop::Swap { pair, token_in, token_out, .. } => json!({
                "pair": pair, "offer_asset": token_in, "ask_asset": token_out,
            }),
            Hop::MintBurn { venue, token_in, token_out, .. } => json!({
                "pair": venue, "offer_asset": token_in, "ask_asset": token_out,
            }),
        })
        .collect();
    json!({
        "execute_route": {
            "offer_amount": amount_in.to_string(),
            "minimum_receive": min_receive.to_string(),
            "route": route,
        }
    })
}

fn user_swap_msg(rng: &mut ChaCha8Rng, denom: &str, amount: u128) -> Value {
    json!({
        "swap": {
            "belief_price": format!("{:.6}", 0.01 + rng.random::<f64>() * 40.0),
            "max_spread": "0.005",
            "offer_asset": {
                "amount": amount.to_string(),
                "info": { "native_token": { "denom": denom } },
            },
        }
    })
}

// ---------------------------------------------------------------------
// shared tx scaffolding

struct TxFactory {
    seed: u64,
    counter: u64,
}

impl TxFactory {
    fn new(seed: u64) -> Self {
        TxFactory { seed, counter: 0 }
    }

    fn hash(&mut self) -> String {
        self.counter += 1;
        sha_hex(&format!("tx:{}:{}", self.seed, self.counter))
    }

    fn executed(
        &mut self,
        sender: &str,
        contract: &str,
        msg: Value,
        gas_used: u64,
        events: Vec<LogEvent>,
    ) -> FixtureTx {
        FixtureTx {
            hash: self.hash(),
            sender: sender.to_string(),
            contract: contract.to_string(),
            execute_msg: Some(msg),
            code: 0,
            gas_used,
            events,
        }
    }

    fn reverted(
        &mut self,
        sender: &str,
        contract: &str,
        msg: Value,
        code: u32,
        gas_used: u64,
    ) -> FixtureTx {
        FixtureTx {
            hash: self.hash(),
            sender: sender.to_string(),
            contract: contract.to_string(),
            execute_msg: Some(msg),
            code,
            gas_used,
            events: Vec::new(),
        }
    }
}

fn revert_code(rng: &mut ChaCha8Rng) -> u32 {
    // Mostly generic contract failures, some out-of-gas.
    *[5u32, 5, 5, 4, 11].choose(rng).expect("nonempty")
}

/// Shuffle units (groups of txs that must share a block) and deal them
/// into `n_blocks` blocks with mildly uneven sizes.
fn pack_blocks(
    mut units: Vec<Vec<FixtureTx>>,
    n_blocks: u64,
    start_height: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<FixtureBlock> {
    units.shuffle(rng);
    let total: usize = units.iter().map(Vec::len).sum();
    let weights: Vec<f64> = (0..n_blocks).map(|_| 0.6 + rng.random::<f64>()).collect();
    let wsum: f64 = weights.iter().sum();

    let mut blocks = Vec::with_capacity(n_blocks as usize);
    let mut time = Utc.with_ymd_and_hms(2021, 10, 4, 0, 0, 0).unwrap();
    let mut acc = 0.0;
    let mut placed = 0usize;
    let mut next_unit = units.into_iter();
    for b in 0..n_blocks {
        acc += weights[b as usize];
        let target = if b == n_blocks - 1 {
            total
        } else {
            (total as f64 * acc / wsum).round() as usize
        };
        let mut txs = Vec::new();
        while placed < target {
            let Some(unit) = next_unit.next() else { break };
            placed += unit.len();
            txs.extend(unit);
        }
        blocks.push(FixtureBlock { height: start_height + b, time, txs });
        time += chrono::Duration::seconds(6 + i64::from(rng.random::<f64>() < 0.5));
    }
    blocks
}

// ---------------------------------------------------------------------
// detect corpus

struct DetectSearcher {
    senders: Vec<String>,
    contracts: Vec<String>,
    wins: u64,
}

/// What a planted arb leaves behind for the failed-attempt planter.
struct ArbImprint {
    unit_index: usize,
    sender: String,
    contract: String,
    msg: Value,
    hops: Vec<(String, String, String, bool)>,
}

fn gen_detect(p: &DetectProfile, seed: u64) -> Result<(Vec<FixtureBlock>, GroundTruth), crate::CliError> {
    if p.n_searchers == 0 || p.n_arbs == 0 {
        return Err(usage("detect profile needs n_searchers > 0 and n_arbs > 0"));
    }
    let mut factory = TxFactory::new(seed);
    let mut book = PairBook::default();
    let cw20s: Vec<String> = (0..10).map(|t| terra_addr("token", t)).collect();

    let mut searchers: Vec<DetectSearcher> = (0..p.n_searchers)
        .map(|s| {
            let s = u64::from(s);
            DetectSearcher {
                senders: (0..1 + s % 3).map(|j| terra_addr("searcher", s * 8 + j)).collect(),
                contracts: (0..1 + s % 2).map(|c| terra_addr("router", s * 8 + c)).collect(),
                wins: 0,
            }
        })
        .collect();
    let searcher_weights: Vec<f64> =
        (0..p.n_searchers).map(|s| 1.0 / f64::from(s + 1)).collect();

    // Exact start-token and path-length pools, shuffled independently.
    let token_weights: Vec<(String, f64)> =
        p.token_split.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let mut start_tokens = expand(&apportion(p.n_arbs, &token_weights));
    start_tokens.shuffle(&mut stream(seed, "start_tokens", 0));
    let mut len_weights: Vec<(u32, f64)> = Vec::new();
    for (k, v) in &p.path_length_weights {
        let len: u32 = k
            .parse()
            .map_err(|_| usage(format!("path_length_weights key {k:?} is not an integer")))?;
        if len < 2 || len as usize > cw20s.len() {
            return Err(usage(format!("path_length_weights key {len} outside 2..=10")));
        }
        len_weights.push((len, *v));
    }
    len_weights.sort_by_key(|(l, _)| *l);
    let mut path_lens = expand(&apportion(p.n_arbs, &len_weights));
    path_lens.shuffle(&mut stream(seed, "path_lens", 0));

    let mut units: Vec<Vec<FixtureTx>> = Vec::new();
    let mut truth_arbs = Vec::new();
    let mut imprints: Vec<ArbImprint> = Vec::new();

    for a in 0..p.n_arbs {
        let mut rng = stream(seed, "arb", a);
        let s = weighted_pick(&mut rng, &searcher_weights);
        let searcher = &mut searchers[s];
        let w = searcher.wins;
        searcher.wins += 1;
        let sender = searcher.senders[(w % searcher.senders.len() as u64) as usize].clone();
        let contract = searcher.contracts
            [((w / searcher.senders.len() as u64) % searcher.contracts.len() as u64) as usize]
            .clone();

        let start = start_tokens[a as usize].clone();
        let len = path_lens[a as usize];
        let mut mids: Vec<String> = Vec::new();
        while mids.len() + 1 < len as usize {
            let t = cw20s[rng.random_range(0..cw20s.len())].clone();
            if !mids.contains(&t) {
                mids.push(t);
            }
        }

        // Micro-unit amounts; the cycle nets a strict profit of 10..300
        // basis points on the input.
        let amount_in = 1_000_000 * rng.random_range(50..5000u128);
        let profit = (amount_in * rng.random_range(10..300u128) / 10_000).max(1);
        let amount_out = amount_in + profit;
        let mint_burn_hop = if len >= 3 && rng.random::<f64>() < p.mint_burn_share {
            Some(rng.random_range(1..len - 1) as usize)
        } else {
            None
        };

        let chain: Vec<&str> = std::iter::once(start.as_str())
            .chain(mids.iter().map(String::as_str))
            .chain(std::iter::once(start.as_str()))
            .collect();
        let mut hops = Vec::new();
        let mut amt = amount_in;
        for (h, pair_tokens) in chain.windows(2).enumerate() {
            let (tin, tout) = (pair_tokens[0], pair_tokens[1]);
            let next = if h + 2 == chain.len() {
                amount_out
            } else {
                (amt * rng.random_range(200..5000u128) / 1000).max(1)
            };
            hops.push(if mint_burn_hop == Some(h) {
                Hop::MintBurn {
                    venue: book.venue(tin, tout),
                    token_in: tin.into(),
                    token_out: tout.into(),
                    amount_in: amt,
                    amount_out: next,
                }
            } else {
                Hop::Swap {
                    pair: book.pair(tin, tout),
                    token_in: tin.into(),
                    token_out: tout.into(),
                    amount_in: amt,
                    amount_out: next,
                }
            });
            amt = next;
        }

        let msg = route_msg(&hops, amount_in, amount_in + 1);
        let marker = (rng.random::<f64>() < 0.5).then(|| contract.clone());
        let gas = 250_000 + 180_000 * u64::from(len) + rng.random_range(0..30_000);
        let events = route_events(marker.as_deref(), &hops);
        let tx = factory.executed(&sender, &contract, msg.clone(), gas, events);

        truth_arbs.push(PlantedArb {
            tx_hash: tx.hash.clone(),
            token_start: start.clone(),
            path_length: len,
            profit: profit.to_string(),
        });
        imprints.push(ArbImprint {
            unit_index: units.len(),
            sender,
            contract,
            msg,
            hops: hops
                .iter()
                .map(|h| match h {
                    Hop::Swap { pair, token_in, token_out, .. } => {
                        (pair.clone(), token_in.clone(), token_out.clone(), false)
                    }
                    Hop::MintBurn { venue, token_in, token_out, .. } => {
                        (venue.clone(), token_in.clone(), token_out.clone(), true)
                    }
                })
                .collect(),
        });
        units.push(vec![tx]);
    }

    // Failed attempts: fixed category mix, then a slice of the
    // all-conditions group becomes exact duplicate submissions.
    let cat_counts = apportion(
        p.n_failed,
        &[(CATEGORY_ALL, 0.3), (CATEGORY_CONTRACT_SHAPE, 0.4), (CATEGORY_SENDER, 0.3)],
    );
    let mut categories = expand(&cat_counts);
    categories.shuffle(&mut stream(seed, "fail_categories", 0));
    let n_all = cat_counts.iter().find(|(k, _)| *k == CATEGORY_ALL).map_or(0, |(_, n)| *n);
    let mut twins_left = (n_all as f64 * p.duplicate_share).round() as u64;

    let mut truth_failed = Vec::new();
    for (f, category) in categories.into_iter().enumerate() {
        let mut rng = stream(seed, "fail", f as u64);
        let source = &imprints[rng.random_range(0..imprints.len())];
        let code = revert_code(&mut rng);
        let gas = 200_000 + rng.random_range(0..600_000u64);
        let (tx, duplicate_of) = match category {
            CATEGORY_ALL if twins_left > 0 => {
                twins_left -= 1;
                // Identical message, same block: the classic race loser.
                let tx = factory.reverted(&source.sender, &source.contract, source.msg.clone(), code, gas);
                let arb_hash = units[source.unit_index][0].hash.clone();
                truth_failed.push(PlantedFail {
                    tx_hash: tx.hash.clone(),
                    category: CATEGORY_ALL,
                    duplicate_of: Some(arb_hash),
                });
                units[source.unit_index].push(tx);
                continue;
            }
            CATEGORY_ALL => {
                let msg = mutate_route_amounts(&source.msg, &mut rng);
                (factory.reverted(&source.sender, &source.contract, msg, code, gas), None)
            }
            CATEGORY_CONTRACT_SHAPE => {
                let msg = mutate_route_amounts(&source.msg, &mut rng);
                let sender = terra_addr("optimist", f as u64);
                (factory.reverted(&sender, &source.contract, msg, code, gas), None)
            }
            _ => {
                // Known sender, but a contract and shape the successful
                // record has never seen.
                let contract = terra_addr("defunct", f as u64);
                let msg = json!({
                    "execute_swap_operations": {
                        "offer_amount": (1_000_000u64 * rng.random_range(10..900)).to_string(),
                        "operations": source
                            .hops
                            .iter()
                            .map(|(pair, tin, tout, _)| json!({"p": pair, "from": tin, "to": tout}))
                            .collect::<Vec<_>>(),
                    }
                });
                (factory.reverted(&source.sender, &contract, msg, code, gas), None)
            }
        };
        truth_failed.push(PlantedFail { tx_hash: tx.hash.clone(), category, duplicate_of });
        units.push(vec![tx]);
    }

    for x in 0..p.n_noise_executed {
        let mut rng = stream(seed, "noise_exec", x);
        units.push(vec![noise_executed(&mut factory, &mut book, &cw20s, &mut rng, x)]);
    }
    for r in 0..p.n_noise_reverted {
        let mut rng = stream(seed, "noise_revert", r);
        units.push(vec![noise_reverted(&mut factory, &mut book, &cw20s, &mut rng, r)]);
    }
    for n in 0..p.n_non_execute {
        units.push(vec![FixtureTx {
            hash: factory.hash(),
            sender: terra_addr("user", 10_000 + n),
            contract: String::new(),
            execute_msg: None,
            code: 0,
            gas_used: 60_000 + (n % 7) * 1_000,
            events: Vec::new(),
        }]);
    }

    let n_txs: u64 = units.iter().flatten().filter(|t| t.execute_msg.is_some()).count() as u64;
    let blocks = pack_blocks(units, p.n_blocks, p.start_height, &mut stream(seed, "pack", 0));
    truth_arbs.sort_by(|a, b| a.tx_hash.cmp(&b.tx_hash));
    truth_failed.sort_by(|a, b| a.tx_hash.cmp(&b.tx_hash));
    Ok((
        blocks,
        GroundTruth {
            kind: "detect",
            seed,
            n_blocks: p.n_blocks,
            n_txs,
            planted_arbs: truth_arbs,
            planted_failed: truth_failed,
            searchers: None,
        },
    ))
}

/// New leaf values, same key structure.
fn mutate_route_amounts(msg: &Value, rng: &mut ChaCha8Rng) -> Value {
    let mut out = msg.clone();
    if let Some(route) = out.pointer_mut("/execute_route") {
        let amount = 1_000_000u64 * rng.random_range(50..5000);
        route["offer_amount"] = Value::String(amount.to_string());
        route["minimum_receive"] = Value::String((amount + rng.random_range(1..1000)).to_string());
    }
    out
}

fn noise_executed(
    factory: &mut TxFactory,
    book: &mut PairBook,
    cw20s: &[String],
    rng: &mut ChaCha8Rng,
    index: u64,
) -> FixtureTx {
    let natives = ["uusd", "uluna", "ukrw", "usdr"];
    let sender = terra_addr("user", rng.random_range(0..4000));
    let gas = 80_000 + rng.random_range(0..320_000u64);
    match weighted_pick(rng, &[0.35, 0.2, 0.15, 0.15, 0.15]) {
        // A plain user swap straight against the pair contract.
        0 => {
            let tin = natives[rng.random_range(0..natives.len())];
            let tout = &cw20s[rng.random_range(0..cw20s.len())];
            let amount_in = 1_000_000 * rng.random_range(1..800u128);
            let amount_out = (amount_in * rng.random_range(100..8000u128) / 1000).max(1);
            let pair = book.pair(tin, tout);
            let hop = Hop::Swap {
                pair: pair.clone(),
                token_in: tin.into(),
                token_out: tout.clone(),
                amount_in,
                amount_out,
            };
            let msg = user_swap_msg(rng, tin, amount_in);
            factory.executed(&sender, &pair, msg, gas, route_events(None, &[hop]))
        }
        // A routed path that never returns to its start token.
        1 => {
            let start = natives[rng.random_range(0..natives.len())];
            let mid = &cw20s[rng.random_range(0..cw20s.len())];
            let mut end = &cw20s[rng.random_range(0..cw20s.len())];
            while end == mid {
                end = &cw20s[rng.random_range(0..cw20s.len())];
            }
            let a0 = 1_000_000 * rng.random_range(5..900u128);
            let a1 = (a0 * rng.random_range(200..4000u128) / 1000).max(1);
            let a2 = (a1 * rng.random_range(200..4000u128) / 1000).max(1);
            let hops = vec![
                Hop::Swap {
                    pair: book.pair(start, mid),
                    token_in: start.into(),
                    token_out: mid.clone(),
                    amount_in: a0,
                    amount_out: a1,
                },
                Hop::Swap {
                    pair: book.pair(mid, end),
                    token_in: mid.clone(),
                    token_out: end.clone(),
                    amount_in: a1,
                    amount_out: a2,
                },
            ];
            let router = terra_addr("public_router", index % 3);
            let msg = route_msg(&hops, a0, 1);
            factory.executed(&sender, &router, msg, gas, route_events(Some(&router), &hops))
        }
        // A closed cycle that loses (or exactly breaks even): the chain and
        // closure hold but the strict-profit test must not.
        2 => {
            let start = natives[rng.random_range(0..natives.len())];
            let mid = &cw20s[rng.random_range(0..cw20s.len())];
            let amount_in = 1_000_000 * rng.random_range(10..2000u128);
            let loss = amount_in * rng.random_range(0..300u128) / 10_000;
            let amount_out = amount_in - loss;
            let a1 = (amount_in * rng.random_range(200..4000u128) / 1000).max(1);
            let hops = vec![
                Hop::Swap {
                    pair: book.pair(start, mid),
                    token_in: start.into(),
                    token_out: mid.clone(),
                    amount_in,
                    amount_out: a1,
                },
                Hop::Swap {
                    pair: book.pair(mid, start),
                    token_in: mid.clone(),
                    token_out: start.into(),
                    amount_in: a1,
                    amount_out,
                },
            ];
            let router = terra_addr("public_router", index % 3);
            let msg = route_msg(&hops, amount_in, 1);
            factory.executed(&sender, &router, msg, gas, route_events(Some(&router), &hops))
        }
        // cw20 transfer: one run nothing claims.
        3 => {
            let token = &cw20s[rng.random_range(0..cw20s.len())];
            let to = terra_addr("user", rng.random_range(0..4000));
            let amount = 1_000_000 * rng.random_range(1..500u128);
            let msg = json!({"transfer": {"recipient": to, "amount": amount.to_string()}});
            let events = vec![wasm_event(vec![
                attr("_contract_address", token.as_str()),
                attr("action", "transfer"),
                attr("from", sender.as_str()),
                attr("to", to.as_str()),
                attr("amount", amount.to_string()),
            ])];
            factory.executed(&sender, token, msg, gas, events)
        }
        // Liquidity provision: recognizable shape, still not a swap.
        _ => {
            let tin = natives[rng.random_range(0..natives.len())];
            let tout = &cw20s[rng.random_range(0..cw20s.len())];
            let pair = book.pair(tin, tout);
            let amount = 1_000_000 * rng.random_range(10..900u128);
            let msg = json!({"provide_liquidity": {"assets": [
                {"amount": amount.to_string(), "info": {"native_token": {"denom": tin}}},
                {"amount": (amount / 3).max(1).to_string(), "info": {"token": {"contract_addr": tout}}},
            ]}});
            let events = vec![wasm_event(vec![
                attr("_contract_address", pair.as_str()),
                attr("action", "provide_liquidity"),
                attr("assets", format!("{amount}{tin}, {}{tout}", (amount / 3).max(1))),
                attr("share", (amount / 2).to_string()),
            ])];
            factory.executed(&sender, &pair, msg, gas, events)
        }
    }
}

/// Reverted traffic with no tie to any successful arbitrage: fresh-ish
/// senders on public contracts. Must never be flagged.
fn noise_reverted(
    factory: &mut TxFactory,
    book: &mut PairBook,
    cw20s: &[String],
    rng: &mut ChaCha8Rng,
    index: u64,
) -> FixtureTx {
    let natives = ["uusd", "uluna", "ukrw", "usdr"];
    let sender = terra_addr("user", rng.random_range(0..4000));
    let tin = natives[rng.random_range(0..natives.len())];
    let tout = &cw20s[rng.random_range(0..cw20s.len())];
    let amount = 1_000_000 * rng.random_range(1..600u128);
    let (contract, msg) = if rng.random::<f64>() < 0.7 {
        (book.pair(tin, tout), user_swap_msg(rng, tin, amount))
    } else {
        (
            terra_addr("public_router", index % 3),
            json!({"assert_limit_order": {"offer_amount": amount.to_string(), "ask_denom": tout}}),
        )
    };
    let code = revert_code(rng);
    factory.reverted(&sender, &contract, msg, code, 150_000 + rng.random_range(0..350_000))
}

// ---------------------------------------------------------------------
// population corpus

fn gen_population(
    p: &PopulationProfile,
    seed: u64,
) -> Result<(Vec<FixtureBlock>, GroundTruth), crate::CliError> {
    if p.n_searchers < 2 || p.max_instances < 1 || p.wins_per_instance < 1 {
        return Err(usage(
            "population profile needs n_searchers >= 2, max_instances >= 1, wins_per_instance >= 1",
        ));
    }
    let mut factory = TxFactory::new(seed);
    let mut book = PairBook::default();
    let cw20s: Vec<String> = (0..10).map(|t| terra_addr("token", t)).collect();

    let mut units: Vec<Vec<FixtureTx>> = Vec::new();
    let mut truth_arbs = Vec::new();
    let mut truth_failed = Vec::new();
    let mut truth_searchers = Vec::new();

    for i in 0..u64::from(p.n_searchers) {
        // Instance count ramps linearly across the roster; everything else
        // derives from it.
        let n_i = 1
            + ((f64::from(p.max_instances - 1) * i as f64 / (f64::from(p.n_searchers) - 1.0))
                .round() as u64);
        let wins = p.wins_per_instance * n_i;
        let fail_ratio = p.fail_base + p.fail_slope * (n_i - 1) as f64;
        let fails = (wins as f64 * fail_ratio).round() as u64;
        let dup_p = if p.max_instances > 1 {
            p.duplicate_max * (n_i - 1) as f64 / f64::from(p.max_instances - 1)
        } else {
            0.0
        };
        let dups = (fails as f64 * dup_p).round() as u64;

        let senders: Vec<String> =
            (0..n_i).map(|j| terra_addr("pop_sender", i * 1000 + j)).collect();
        let n_contracts = 1 + i % 3;
        let contracts: Vec<String> =
            (0..n_contracts).map(|c| terra_addr("pop_router", i * 1000 + c)).collect();
        let token = cw20s[(i % cw20s.len() as u64) as usize].clone();

        let first_unit = units.len();
        for k in 0..wins {
            let mut rng = stream(seed, "pop_win", i * 1_000_000 + k);
            let sender = &senders[(k % n_i) as usize];
            let contract = &contracts[((k / n_i) % n_contracts) as usize];
            // Constant profit per win, so aggregate profit is proportional
            // to the win count.
            let amount_in = 100_000_000 + 1_000 * (i * 1_000_000 + k) as u128;
            let profit = 5_000_000u128;
            let amount_out = amount_in + profit;
            let a1 = (amount_in * 31 / 1000).max(1);
            let hops = vec![
                Hop::Swap {
                    pair: book.pair("uusd", &token),
                    token_in: "uusd".into(),
                    token_out: token.clone(),
                    amount_in,
                    amount_out: a1,
                },
                Hop::Swap {
                    pair: book.pair(&token, "uusd"),
                    token_in: token.clone(),
                    token_out: "uusd".into(),
                    amount_in: a1,
                    amount_out,
                },
            ];
            let msg = route_msg(&hops, amount_in, amount_in + 1);
            let gas = 420_000 + rng.random_range(0..40_000);
            let tx = factory.executed(sender, contract, msg, gas, route_events(None, &hops));
            truth_arbs.push(PlantedArb {
                tx_hash: tx.hash.clone(),
                token_start: "uusd".into(),
                path_length: 2,
                profit: profit.to_string(),
            });
            units.push(vec![tx]);
        }

        for r in 0..fails {
            let mut rng = stream(seed, "pop_fail", i * 1_000_000 + r);
            let code = revert_code(&mut rng);
            let gas = 380_000 + rng.random_range(0..60_000);
            if r < dups {
                // Duplicate of a win from a sibling instance: identical
                // message, same block. With heavy fail ratios there are
                // more duplicates than wins, so they wrap.
                let win_unit = first_unit + (r % wins) as usize;
                let win = &units[win_unit][0];
                let sender = senders[((r + 1) % n_i) as usize].clone();
                let msg = win.execute_msg.clone().expect("win has a message");
                let contract = win.contract.clone();
                let tx = factory.reverted(&sender, &contract, msg, code, gas);
                truth_failed.push(PlantedFail {
                    tx_hash: tx.hash.clone(),
                    category: CATEGORY_ALL,
                    duplicate_of: Some(win.hash.clone()),
                });
                units[win_unit].push(tx);
            } else {
                // An attempt at a distinct opportunity that didn't land.
                let sender = &senders[(r % n_i) as usize];
                let contract = &contracts[((r / n_i) % n_contracts) as usize];
                let amount_in = 100_000_000 + 1_000 * (i * 1_000_000 + 500_000 + r) as u128;
                let a1 = (amount_in * 29 / 1000).max(1);
                let hops = vec![
                    Hop::Swap {
                        pair: book.pair("uusd", &token),
                        token_in: "uusd".into(),
                        token_out: token.clone(),
                        amount_in,
                        amount_out: a1,
                    },
                    Hop::Swap {
                        pair: book.pair(&token, "uusd"),
                        token_in: token.clone(),
                        token_out: "uusd".into(),
                        amount_in: a1,
                        amount_out: amount_in + 4_000_000,
                    },
                ];
                let msg = route_msg(&hops, amount_in, amount_in + 1);
                let tx = factory.reverted(sender, contract, msg, code, gas);
                truth_failed.push(PlantedFail {
                    tx_hash: tx.hash.clone(),
                    category: CATEGORY_ALL,
                    duplicate_of: None,
                });
                units.push(vec![tx]);
            }
        }

        let expected_id = senders
            .iter()
            .chain(contracts.iter())
            .min()
            .expect("searcher has members")
            .clone();
        truth_searchers.push(SearcherTruth {
            expected_id,
            n_instances: n_i as u32,
            wins,
            fails,
            duplicate_fails: dups,
        });
    }

    for x in 0..p.n_noise_executed {
        let mut rng = stream(seed, "noise_exec", x);
        units.push(vec![noise_executed(&mut factory, &mut book, &cw20s, &mut rng, x)]);
    }
    for r in 0..p.n_noise_reverted {
        let mut rng = stream(seed, "noise_revert", r);
        units.push(vec![noise_reverted(&mut factory, &mut book, &cw20s, &mut rng, r)]);
    }

    let n_txs: u64 = units.iter().flatten().filter(|t| t.execute_msg.is_some()).count() as u64;
    let n_blocks = n_txs.div_ceil(p.txs_per_block).max(1);
    let blocks = pack_blocks(units, n_blocks, p.start_height, &mut stream(seed, "pack", 0));
    truth_arbs.sort_by(|a, b| a.tx_hash.cmp(&b.tx_hash));
    truth_failed.sort_by(|a, b| a.tx_hash.cmp(&b.tx_hash));
    Ok((
        blocks,
        GroundTruth {
            kind: "population",
            seed,
            n_blocks,
            n_txs,
            planted_arbs: truth_arbs,
            planted_failed: truth_failed,
            searchers: Some(truth_searchers),
        },
    ))
}
