//! Bipartite maximum matching on the double cover of an undirected graph.
//!
//! The double cover has a left copy and a right copy of every vertex, and
//! for each undirected edge {u, v} the two bipartite edges u+ -- v- and
//! v+ -- u-. Its maximum matching size is exactly twice the fractional
//! matching number of the original graph, and it is perfect exactly when
//! the graph has a fractional perfect matching (a spanning vertex-disjoint
//! union of edges and odd cycles).

use std::collections::BTreeSet;

use serde::Serialize;

/// Maximum matching via augmenting paths (Kuhn's algorithm).
/// `adj[l]` lists right-vertices reachable from left-vertex `l`.
/// Returns the matching size and, for each left vertex, its partner.
pub fn max_bipartite_matching(n_right: usize, adj: &[Vec<usize>]) -> (usize, Vec<Option<usize>>) {
    let n_left = adj.len();
    let mut right_to_left: Vec<Option<usize>> = vec![None; n_right];
    let mut size = 0;
    let mut visited = vec![u32::MAX; n_right];
    for (l, stamp) in (0..n_left).zip(0u32..) {
        if try_augment(l, adj, &mut right_to_left, &mut visited, stamp) {
            size += 1;
        }
    }
    let mut left_to_right = vec![None; n_left];
    for (r, l) in right_to_left.iter().enumerate() {
        if let Some(l) = l {
            left_to_right[*l] = Some(r);
        }
    }
    (size, left_to_right)
}

fn try_augment(
    l: usize,
    adj: &[Vec<usize>],
    right_to_left: &mut [Option<usize>],
    visited: &mut [u32],
    stamp: u32,
) -> bool {
    for &r in &adj[l] {
        if visited[r] == stamp {
            continue;
        }
        visited[r] = stamp;
        let prev = right_to_left[r];
        let free = match prev {
            None => true,
            Some(prev_l) => try_augment(prev_l, adj, right_to_left, visited, stamp),
        };
        if free {
            right_to_left[r] = Some(l);
            return true;
        }
    }
    false
}

fn double_cover_adjacency(k: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    // Vertices are 1-based in the edge set; the cover uses 0-based indices.
    let mut adj = vec![Vec::new(); k];
    for &(u, v) in edges {
        adj[u - 1].push(v - 1);
        adj[v - 1].push(u - 1);
    }
    adj
}

/// Maximum matching size of the bipartite double cover.
pub fn double_cover_matching(k: usize, edges: &BTreeSet<(usize, usize)>) -> (usize, Vec<Option<usize>>) {
    let adj = double_cover_adjacency(k, edges);
    max_bipartite_matching(k, &adj)
}

/// Fractional matching number: half the double-cover maximum matching size.
pub fn fractional_matching_number(k: usize, edges: &BTreeSet<(usize, usize)>) -> f64 {
    let (size, _) = double_cover_matching(k, edges);
    size as f64 / 2.0
}

/// One component of a fractional perfect matching witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "vertices", rename_all = "snake_case")]
pub enum CoverElement {
    /// A matched edge carrying weight 1.
    Edge(usize, usize),
    /// An odd cycle whose edges each carry weight 1/2, listed in cycle order.
    OddCycle(Vec<usize>),
}

/// A spanning vertex-disjoint union of edges and odd cycles, reconstructed
/// from a perfect double-cover matching, or `None` when no fractional
/// perfect matching exists.
///
/// A perfect matching of the cover maps every left copy v+ to a right copy
/// sigma(v)-, where sigma is a fixed-point-free permutation moving along
/// graph edges. Its 2-cycles are matched edges; longer even cycles split
/// into alternating disjoint edges; odd cycles stay as odd cycles.
pub fn fpm_witness(k: usize, edges: &BTreeSet<(usize, usize)>) -> Option<Vec<CoverElement>> {
    let (size, left_to_right) = double_cover_matching(k, edges);
    if size != k {
        return None;
    }
    let sigma: Vec<usize> = left_to_right.into_iter().map(|r| r.expect("perfect")).collect();
    let mut seen = vec![false; k];
    let mut witness = Vec::new();
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            cycle.push(v + 1);
            v = sigma[v];
        }
        if cycle.len() % 2 == 0 {
            for pair in cycle.chunks(2) {
                witness.push(CoverElement::Edge(pair[0], pair[1]));
            }
        } else {
            witness.push(CoverElement::OddCycle(cycle));
        }
    }
    Some(witness)
}
