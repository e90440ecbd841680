//! Bottleneck-link combinatorics: certify bottleneck states through the
//! fractional-perfect-matching criterion, classify irreducible and minimal
//! states, and enumerate or count the minimal states.
//!
//! Each directed bottleneck link (r, t) pins the pair constraint
//! R_r + R_t <= log2(1 + 2*SNR), so all matching logic runs on the
//! undirected projection of the link set; direction is kept in storage for
//! enumeration and counting fidelity. The certificate is sufficient, not
//! necessary: a graph without a fractional perfect matching is reported as
//! `NotCertified` rather than "not a bottleneck state".

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{double_cover_matching, fpm_witness, CoverElement};

/// The designated equal-strength cross links of a K-user network.
/// Links are directed pairs (receiver, transmitter), users numbered 1..=K.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBottleneckGraph")]
pub struct BottleneckGraph {
    #[serde(rename = "K")]
    k: usize,
    links: BTreeSet<(usize, usize)>,
}

#[derive(Deserialize)]
struct RawBottleneckGraph {
    #[serde(rename = "K")]
    k: usize,
    links: Vec<(usize, usize)>,
}

impl TryFrom<RawBottleneckGraph> for BottleneckGraph {
    type Error = Error;

    fn try_from(raw: RawBottleneckGraph) -> Result<Self> {
        BottleneckGraph::new(raw.k, raw.links)
    }
}

/// Classification of a link set under the fractional-matching certificate.
/// Containment: MinimalBottleneck < IrreducibleBottleneck < Bottleneck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateClass {
    NotCertified,
    Bottleneck,
    IrreducibleBottleneck,
    MinimalBottleneck,
}

impl StateClass {
    /// True for every certified bottleneck state, of any refinement.
    pub fn is_certified(self) -> bool {
        self >= StateClass::Bottleneck
    }

    pub fn is_irreducible(self) -> bool {
        self >= StateClass::IrreducibleBottleneck
    }

    pub fn is_minimal(self) -> bool {
        self == StateClass::MinimalBottleneck
    }
}

impl std::fmt::Display for StateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            StateClass::NotCertified => "NotCertified",
            StateClass::Bottleneck => "Bottleneck",
            StateClass::IrreducibleBottleneck => "IrreducibleBottleneck",
            StateClass::MinimalBottleneck => "MinimalBottleneck",
        };
        write!(f, "{name}")
    }
}

impl BottleneckGraph {
    pub fn new(k: usize, links: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if k < 1 {
            return Err(Error::Config("user count must be at least 1".into()));
        }
        let links: BTreeSet<(usize, usize)> = links.into_iter().collect();
        for &(r, t) in &links {
            if r == t {
                return Err(Error::Config(format!("self-loop link ({r},{t}) is not allowed")));
            }
            if r < 1 || r > k || t < 1 || t > k {
                return Err(Error::Config(format!(
                    "link ({r},{t}) has an endpoint outside 1..={k}"
                )));
            }
        }
        Ok(BottleneckGraph { k, links })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Projection of the directed links to deduplicated unordered pairs.
    pub fn undirected_edges(&self) -> BTreeSet<(usize, usize)> {
        self.links.iter().map(|&(r, t)| (r.min(t), r.max(t))).collect()
    }

    fn without_link(&self, link: (usize, usize)) -> BottleneckGraph {
        let mut links = self.links.clone();
        links.remove(&link);
        BottleneckGraph { k: self.k, links }
    }
}

/// True iff the undirected edge set admits a fractional perfect matching:
/// a spanning collection of vertex-disjoint edges and odd cycles. Tested
/// through a perfect matching of the bipartite double cover.
pub fn has_fpm(graph: &BottleneckGraph) -> bool {
    let (size, _) = double_cover_matching(graph.k, &graph.undirected_edges());
    size == graph.k
}

/// The witness behind `has_fpm`, reconstructed from the double-cover
/// matching: the list of unit edges and half-weight odd cycles.
pub fn certificate(graph: &BottleneckGraph) -> Option<Vec<CoverElement>> {
    fpm_witness(graph.k, &graph.undirected_edges())
}

/// Classifies a link set.
///
/// Irreducibility is certificate-relative: a state is irreducible when
/// removing any single directed link destroys the fractional perfect
/// matching of the remainder. Minimality additionally pins the link count
/// to `minimal_link_count(K)`.
pub fn classify(graph: &BottleneckGraph) -> StateClass {
    if !has_fpm(graph) {
        return StateClass::NotCertified;
    }
    let irreducible = graph
        .links
        .iter()
        .all(|&link| !has_fpm(&graph.without_link(link)));
    if !irreducible {
        return StateClass::Bottleneck;
    }
    match minimal_link_count(graph.k) {
        Ok(m) if graph.link_count() == m => StateClass::MinimalBottleneck,
        _ => StateClass::IrreducibleBottleneck,
    }
}

/// Fewest bottleneck links that can pin a K-user network:
/// K/2 for even K (a disjoint perfect matching), (K+3)/2 for odd K
/// (a triangle plus a disjoint matching).
pub fn minimal_link_count(k: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::Domain(format!("minimal link count needs K >= 2, got {k}")));
    }
    Ok(if k % 2 == 0 { k / 2 } else { (k + 3) / 2 })
}

/// Number of distinct minimal bottleneck states for even K:
/// K!/(K/2)! directed perfect matchings ((K-1)!! pairings times 2^(K/2)
/// direction choices).
pub fn count_minimal_states(k: usize) -> Result<BigUint> {
    if k < 2 {
        return Err(Error::Domain(format!("count needs K >= 2, got {k}")));
    }
    if k % 2 != 0 {
        return Err(Error::Domain(format!(
            "the closed-form count covers even K only, got {k}; use enumerate_minimal_states"
        )));
    }
    let mut count = BigUint::from(1u32);
    for i in (k / 2 + 1)..=k {
        count *= BigUint::from(i);
    }
    Ok(count)
}

const ENUMERATE_MAX_K: usize = 8;

/// All directed link sets of minimal size that classify as minimal
/// bottleneck states. Exhaustive over combinations, guarded to K <= 8.
pub fn enumerate_minimal_states(k: usize) -> Result<Vec<BottleneckGraph>> {
    if k > ENUMERATE_MAX_K {
        return Err(Error::Resource(format!(
            "enumeration is limited to K <= {ENUMERATE_MAX_K}, got {k}"
        )));
    }
    let m = minimal_link_count(k)?;
    let mut all_links = Vec::new();
    for r in 1..=k {
        for t in 1..=k {
            if r != t {
                all_links.push((r, t));
            }
        }
    }
    let mut states = Vec::new();
    for combo in all_links.iter().combinations(m) {
        let graph = BottleneckGraph {
            k,
            links: combo.into_iter().copied().collect(),
        };
        if classify(&graph) == StateClass::MinimalBottleneck {
            states.push(graph);
        }
    }
    Ok(states)
}

const BRUTE_MAX_K: usize = 10;

/// Independent oracle for `has_fpm`: exhaustive search for a spanning
/// vertex-disjoint union of edges and odd cycles, memoized on the covered
/// vertex set. Guarded to K <= 10.
pub fn brute_fpm(graph: &BottleneckGraph) -> Result<bool> {
    let k = graph.k;
    if k > BRUTE_MAX_K {
        return Err(Error::Resource(format!(
            "brute-force cover search is limited to K <= {BRUTE_MAX_K}, got {k}"
        )));
    }
    let mut adj = vec![0u32; k];
    for (u, v) in graph.undirected_edges() {
        adj[u - 1] |= 1 << (v - 1);
        adj[v - 1] |= 1 << (u - 1);
    }
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    let mut memo = vec![None; 1 << k];
    Ok(cover_search(0, full, &adj, &mut memo))
}

fn cover_search(covered: u32, full: u32, adj: &[u32], memo: &mut [Option<bool>]) -> bool {
    if covered == full {
        return true;
    }
    if let Some(known) = memo[covered as usize] {
        return known;
    }
    let free = full & !covered;
    // A free vertex with no free neighbor can never be covered.
    let mut v_iter = free;
    while v_iter != 0 {
        let v = v_iter.trailing_zeros() as usize;
        v_iter &= v_iter - 1;
        if adj[v] & free == 0 {
            memo[covered as usize] = Some(false);
            return false;
        }
    }
    let v = free.trailing_zeros() as usize;
    let mut found = false;
    // Branch 1: cover v with a disjoint edge.
    let mut candidates = adj[v] & free;
    while candidates != 0 {
        let u = candidates.trailing_zeros();
        candidates &= candidates - 1;
        if cover_search(covered | (1 << v) | (1 << u), full, adj, memo) {
            found = true;
            break;
        }
    }
    // Branch 2: cover v with an odd cycle through free vertices.
    if !found {
        found = odd_cycle_search(v, v, 1 << v, 1, free, covered, full, adj, memo);
    }
    memo[covered as usize] = Some(found);
    found
}

#[allow(clippy::too_many_arguments)]
fn odd_cycle_search(
    start: usize,
    current: usize,
    path: u32,
    len: u32,
    free: u32,
    covered: u32,
    full: u32,
    adj: &[u32],
    memo: &mut [Option<bool>],
) -> bool {
    if len >= 3
        && len % 2 == 1
        && adj[current] & (1 << start) != 0
        && cover_search(covered | path, full, adj, memo)
    {
        return true;
    }
    let mut next = adj[current] & free & !path;
    while next != 0 {
        let w = next.trailing_zeros() as usize;
        next &= next - 1;
        if odd_cycle_search(start, w, path | (1 << w), len + 1, free, covered, full, adj, memo) {
            return true;
        }
    }
    false
}
