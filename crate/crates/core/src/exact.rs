//! Ground-truth matching algorithms run on fully materialized graphs.
//!
//! These are the verification oracles the estimators are checked against:
//! exact maximum matching (Hopcroft-Karp on bipartite inputs, Gabow's
//! algorithm via `petgraph` otherwise), greedy maximal matching over an
//! explicit edge order, random-greedy maximal matching under hashed edge
//! ranks, and vertex-cover certification.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, Side};
use crate::hash::hash64;

const NONE: u32 = u32::MAX;

/// A matching: a set of edges no two of which share an endpoint, plus the
/// induced per-vertex matched flags.
#[derive(Debug, Clone)]
pub struct MatchingView {
    edges: Vec<(u32, u32)>,
    matched: Vec<bool>,
}

impl MatchingView {
    /// Builds a view from edge pairs, validating pairwise disjointness.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Result<Self> {
        let mut matched = vec![false; n];
        let mut edges = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u == v || u as usize >= n || v as usize >= n {
                return Err(Error::Usage(format!("bad matching edge ({u}, {v})")));
            }
            if matched[u as usize] || matched[v as usize] {
                return Err(Error::Usage(format!(
                    "matching edges share endpoint at ({u}, {v})"
                )));
            }
            matched[u as usize] = true;
            matched[v as usize] = true;
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        Ok(MatchingView { edges, matched })
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_matched(&self, v: u32) -> bool {
        self.matched[v as usize]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn matched_flags(&self) -> &[bool] {
        &self.matched
    }

    /// Checks that every matching edge exists in `g`.
    pub fn validate_in(&self, g: &Graph) -> Result<()> {
        for &(u, v) in &self.edges {
            if !g.has_edge(u, v) {
                return Err(Error::Internal(format!(
                    "matching edge ({u}, {v}) not in graph"
                )));
            }
        }
        Ok(())
    }

    /// Serializes as `u v` lines for audit.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Exact maximum matching. Bipartite graphs (bipartition present) use
/// Hopcroft-Karp; general graphs fall back to Gabow's algorithm from
/// `petgraph`, which is intended for desk-scale verification only.
pub fn hopcroft_karp(g: &Graph) -> MatchingView {
    match g.bipartition() {
        Some(sides) => hopcroft_karp_bipartite(g, sides).0,
        None => general_maximum_matching(g),
    }
}

/// Exact maximum matching together with a minimum vertex cover of equal
/// size (König construction). Requires a bipartition.
pub fn hopcroft_karp_with_cover(g: &Graph) -> Result<(MatchingView, Vec<u32>)> {
    let sides = g
        .bipartition()
        .ok_or_else(|| Error::Usage("bipartition required for a König cover".into()))?;
    let (mv, cover) = hopcroft_karp_bipartite(g, sides);
    Ok((mv, cover))
}

fn hopcroft_karp_bipartite(g: &Graph, sides: &[Side]) -> (MatchingView, Vec<u32>) {
    let n = g.n();
    let left: Vec<u32> = (0..n as u32)
        .filter(|&v| sides[v as usize] == Side::V)
        .collect();
    let mut partner = vec![NONE; n];
    let mut dist = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();

    loop {
        // BFS layers over left vertices.
        queue.clear();
        for &u in &left {
            if partner[u as usize] == NONE {
                dist[u as usize] = 0;
                queue.push_back(u);
            } else {
                dist[u as usize] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                let w = partner[v as usize];
                if w == NONE {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        for &u in &left {
            if partner[u as usize] == NONE {
                augment(g, u, &mut partner, &mut dist);
            }
        }
    }

    let pairs: Vec<(u32, u32)> = left
        .iter()
        .filter(|&&u| partner[u as usize] != NONE)
        .map(|&u| (u, partner[u as usize]))
        .collect();
    let mv = MatchingView::from_pairs(n, &pairs).expect("matcher produced a valid matching");

    // König: Z = vertices alternating-reachable from free left vertices
    // (non-matching edges leftwards, matching edges back). Cover is
    // (L \ Z) ∪ (R ∩ Z).
    let mut in_z = vec![false; n];
    queue.clear();
    for &u in &left {
        if partner[u as usize] == NONE {
            in_z[u as usize] = true;
            queue.push_back(u);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if partner[u as usize] == v || in_z[v as usize] {
                continue;
            }
            in_z[v as usize] = true;
            let w = partner[v as usize];
            if w != NONE && !in_z[w as usize] {
                in_z[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    let mut cover = Vec::new();
    for v in 0..n as u32 {
        let is_left = sides[v as usize] == Side::V;
        if (is_left && !in_z[v as usize]) || (!is_left && in_z[v as usize]) {
            cover.push(v);
        }
    }
    debug_assert_eq!(
        cover.len(),
        mv.size(),
        "König cover size must equal matching size"
    );
    (mv, cover)
}

/// Iterative augmenting DFS along BFS layers.
fn augment(g: &Graph, root: u32, partner: &mut [u32], dist: &mut [u32]) -> bool {
    // Frame: (left vertex, next neighbor index); `chosen[k]` is the right
    // vertex frame k descended through.
    let mut stack: Vec<(u32, usize)> = vec![(root, 0)];
    let mut chosen: Vec<u32> = Vec::new();
    'outer: while let Some(&mut (u, ref mut idx)) = stack.last_mut() {
        let nbrs = g.neighbors(u);
        while *idx < nbrs.len() {
            let v = nbrs[*idx];
            *idx += 1;
            let w = partner[v as usize];
            if w == NONE {
                // Free right endpoint: flip along the whole stack.
                partner[v as usize] = u;
                partner[u as usize] = v;
                for k in (0..stack.len() - 1).rev() {
                    let uk = stack[k].0;
                    let vk = chosen[k];
                    partner[vk as usize] = uk;
                    partner[uk as usize] = vk;
                }
                return true;
            }
            if dist[w as usize] == dist[u as usize] + 1 {
                chosen.push(v);
                stack.push((w, 0));
                continue 'outer;
            }
        }
        dist[u as usize] = u32::MAX;
        stack.pop();
        chosen.pop();
    }
    false
}

/// Exact maximum matching on a general graph via `petgraph`.
fn general_maximum_matching(g: &Graph) -> MatchingView {
    use petgraph::graph::{NodeIndex, UnGraph};
    let mut pg = UnGraph::<(), ()>::with_capacity(g.n(), g.m());
    for _ in 0..g.n() {
        pg.add_node(());
    }
    for (u, v) in g.edges() {
        pg.add_edge(NodeIndex::new(u as usize), NodeIndex::new(v as usize), ());
    }
    let matching = petgraph::algo::matching::maximum_matching(&pg);
    let pairs: Vec<(u32, u32)> = matching
        .edges()
        .map(|(a, b)| (a.index() as u32, b.index() as u32))
        .collect();
    MatchingView::from_pairs(g.n(), &pairs).expect("matcher produced a valid matching")
}

/// Greedy maximal matching over an explicit edge sequence: an edge is taken
/// iff both endpoints are unmatched when it is reached. Duplicates are no-ops.
pub fn greedy_maximal_matching(edges: &[(u32, u32)], n: usize) -> MatchingView {
    let mut matched = vec![false; n];
    let mut taken = Vec::new();
    for &(u, v) in edges {
        debug_assert!((u as usize) < n && (v as usize) < n && u != v);
        if !matched[u as usize] && !matched[v as usize] {
            matched[u as usize] = true;
            matched[v as usize] = true;
            taken.push((u.min(v), u.max(v)));
        }
    }
    taken.sort_unstable();
    MatchingView {
        edges: taken,
        matched,
    }
}

/// Rank key: hashed value first, ties broken by the canonical endpoint pair.
pub type EdgeRankKey = (u64, u32, u32);

/// Rank key of edge `(u, v)` under `seed`. The same function drives both the
/// global and the local random-greedy simulations, so their outputs agree
/// exactly.
pub fn edge_rank(seed: u64, u: u32, v: u32) -> EdgeRankKey {
    let (a, b) = (u.min(v), u.max(v));
    (hash64(seed, a as u64, b as u64), a, b)
}

/// Random greedy maximal matching: greedy over all edges ordered by hashed
/// rank. Depends only on the edge set and the seed, not on storage order.
pub fn rgmm_global(g: &Graph, seed: u64) -> MatchingView {
    let mut ranked: Vec<(EdgeRankKey, (u32, u32))> = g
        .edges()
        .into_iter()
        .map(|(u, v)| (edge_rank(seed, u, v), (u, v)))
        .collect();
    ranked.sort_unstable_by_key(|&(r, _)| r);
    let ordered: Vec<(u32, u32)> = ranked.into_iter().map(|(_, e)| e).collect();
    greedy_maximal_matching(&ordered, g.n())
}

/// True iff every edge of `g` has at least one endpoint in `cover`.
pub fn verify_vertex_cover(g: &Graph, cover: &[u32]) -> bool {
    let mut in_cover = vec![false; g.n()];
    for &v in cover {
        if (v as usize) < g.n() {
            in_cover[v as usize] = true;
        }
    }
    for (u, v) in g.edges() {
        if !in_cover[u as usize] && !in_cover[v as usize] {
            return false;
        }
    }
    true
}
