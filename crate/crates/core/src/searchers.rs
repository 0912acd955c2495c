//! Searcher identification: senders and contracts form a bipartite
//! interaction graph (an edge per observed sender→contract execution), and
//! each connected component is taken to be one searcher operation. The
//! component's id is its lexicographically smallest member address, which
//! is stable under insertion order and across runs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbdetect::ArbitrageRecord;
use crate::failedarb::FailedArbRecord;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("address {addr} appears as both sender and contract")]
    BipartiteViolation { addr: String },
    #[error("sender {sender} and contract {contract} resolve to different searchers ({a} vs {b})")]
    AmbiguousAssignment { sender: String, contract: String, a: String, b: String },
}

/// Synthetic id for records whose endpoints joined no cluster.
pub const UNCLUSTERED: &str = "unclustered";

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionGraph {
    /// (sender, contract) -> times observed.
    pub edges: BTreeMap<(String, String), u64>,
}

impl InteractionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, sender: &str, contract: &str) {
        *self.edges.entry((sender.to_string(), contract.to_string())).or_insert(0) += 1;
    }

    pub fn senders(&self) -> BTreeSet<&str> {
        self.edges.keys().map(|(s, _)| s.as_str()).collect()
    }

    pub fn contracts(&self) -> BTreeSet<&str> {
        self.edges.keys().map(|(_, c)| c.as_str()).collect()
    }

    /// Addresses appearing on both sides break the bipartite reading.
    pub fn check_bipartite(&self) -> Result<(), ClusterError> {
        let senders = self.senders();
        if let Some(addr) = self.contracts().intersection(&senders).next() {
            return Err(ClusterError::BipartiteViolation { addr: addr.to_string() });
        }
        Ok(())
    }

    /// GraphViz dot, edges weighted by observation count.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph interactions {\n");
        for ((s, c), n) in &self.edges {
            out.push_str(&format!("  \"{s}\" -- \"{c}\" [weight={n}];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Build the graph from detected records. Failed attempts are optional
/// evidence; excluded contracts (shared public routers would glue
/// unrelated searchers together) drop their edges entirely.
pub fn build_graph(
    arbs: &[ArbitrageRecord],
    failed: Option<&[FailedArbRecord]>,
    exclude_contracts: &BTreeSet<String>,
) -> InteractionGraph {
    let mut g = InteractionGraph::new();
    for r in arbs {
        if !exclude_contracts.contains(&r.contract) {
            g.add_edge(&r.sender, &r.contract);
        }
    }
    if let Some(failed) = failed {
        for r in failed {
            if !exclude_contracts.contains(&r.contract) {
                g.add_edge(&r.sender, &r.contract);
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearcherCluster {
    pub searcher_id: String,
    pub senders: BTreeSet<String>,
    pub contracts: BTreeSet<String>,
}

/// Connected components via union-find, returned sorted by `searcher_id`.
pub fn connected_components(g: &InteractionGraph) -> Vec<SearcherCluster> {
    // Node universe: senders tagged 0, contracts tagged 1 so an address
    // reused on both sides stays two nodes (callers that care run
    // check_bipartite first).
    let mut index: BTreeMap<(u8, &str), usize> = BTreeMap::new();
    for (s, c) in g.edges.keys() {
        let n = index.len();
        index.entry((0, s)).or_insert(n);
        let n = index.len();
        index.entry((1, c)).or_insert(n);
    }
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (s, c) in g.edges.keys() {
        let a = find(&mut parent, index[&(0, s.as_str())]);
        let b = find(&mut parent, index[&(1, c.as_str())]);
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, SearcherCluster> = BTreeMap::new();
    for ((side, addr), &i) in &index {
        let root = find(&mut parent, i);
        let cluster = groups.entry(root).or_insert_with(|| SearcherCluster {
            searcher_id: String::new(),
            senders: BTreeSet::new(),
            contracts: BTreeSet::new(),
        });
        match side {
            0 => cluster.senders.insert(addr.to_string()),
            _ => cluster.contracts.insert(addr.to_string()),
        };
    }
    let mut out: Vec<SearcherCluster> = groups
        .into_values()
        .map(|mut c| {
            c.searcher_id = c
                .senders
                .iter()
                .chain(c.contracts.iter())
                .min()
                .expect("component has members")
                .clone();
            c
        })
        .collect();
    out.sort_by(|a, b| a.searcher_id.cmp(&b.searcher_id));
    out
}

/// Reverse lookup from either endpoint to its cluster id.
pub struct ClusterLookup<'a> {
    by_sender: BTreeMap<&'a str, &'a str>,
    by_contract: BTreeMap<&'a str, &'a str>,
}

impl<'a> ClusterLookup<'a> {
    pub fn new(clusters: &'a [SearcherCluster]) -> Self {
        let mut by_sender = BTreeMap::new();
        let mut by_contract = BTreeMap::new();
        for c in clusters {
            for s in &c.senders {
                by_sender.insert(s.as_str(), c.searcher_id.as_str());
            }
            for k in &c.contracts {
                by_contract.insert(k.as_str(), c.searcher_id.as_str());
            }
        }
        ClusterLookup { by_sender, by_contract }
    }

    /// Resolve a record's endpoints. Disagreement between the two sides
    /// means the clustering didn't come from this record set.
    pub fn assign(&self, sender: &str, contract: &str) -> Result<&'a str, ClusterError> {
        match (self.by_sender.get(sender), self.by_contract.get(contract)) {
            (Some(a), Some(b)) if a == b => Ok(a),
            (Some(a), Some(b)) => Err(ClusterError::AmbiguousAssignment {
                sender: sender.into(),
                contract: contract.into(),
                a: a.to_string(),
                b: b.to_string(),
            }),
            (Some(a), None) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Ok(UNCLUSTERED),
        }
    }
}
