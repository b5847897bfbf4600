//! Static simple graphs with per-vertex ordered adjacency, plus the two
//! query-counted access models (adjacency list and adjacency matrix).
//!
//! Adjacency order is part of a graph's identity: generators control it and
//! serialization preserves it, so an instance is bit-reproducible across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side of a bipartition. `V` is the "left" part, `U` the "right" part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    V,
    U,
}

/// Which oracle access model an algorithm runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryModel {
    List,
    Matrix,
}

/// An immutable simple undirected graph.
///
/// `adj` keeps neighbors in stored order (the order matters to list-model
/// algorithms); `sorted` keeps a sorted copy per vertex for O(log d) edge
/// membership tests.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    sorted: Vec<Vec<u32>>,
    m: usize,
    bipartition: Option<Vec<Side>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list. Rejects self-loops,
    /// duplicate edges and out-of-range endpoints. Adjacency order follows
    /// the order edges appear in `edges`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parse(format!(
                    "edge ({u}, {v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop at vertex {u}")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Self::from_adjacency(adj)
    }

    /// Builds a graph from per-vertex adjacency lists, validating symmetry,
    /// simplicity and range. The given neighbor order is preserved.
    pub fn from_adjacency(adj: Vec<Vec<u32>>) -> Result<Self> {
        let n = adj.len();
        let mut sorted = Vec::with_capacity(n);
        let mut deg_sum = 0usize;
        for (v, list) in adj.iter().enumerate() {
            let mut s = list.clone();
            s.sort_unstable();
            for w in s.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Parse(format!("duplicate edge ({v}, {})", w[0])));
                }
            }
            if let Some(&u) = s.last() {
                if u as usize >= n {
                    return Err(Error::Parse(format!(
                        "neighbor {u} of vertex {v} out of range for n={n}"
                    )));
                }
            }
            if s.binary_search(&(v as u32)).is_ok() {
                return Err(Error::Parse(format!("self-loop at vertex {v}")));
            }
            deg_sum += s.len();
            sorted.push(s);
        }
        // Symmetry: u in adj[v] iff v in adj[u].
        for (v, s) in sorted.iter().enumerate() {
            for &u in s {
                if sorted[u as usize].binary_search(&(v as u32)).is_err() {
                    return Err(Error::Parse(format!(
                        "asymmetric adjacency: {u} listed for {v} but not vice versa"
                    )));
                }
            }
        }
        Ok(Graph {
            adj,
            sorted,
            m: deg_sum / 2,
            bipartition: None,
        })
    }

    /// Attaches a bipartition, checking that every edge crosses sides.
    pub fn with_bipartition(mut self, sides: Vec<Side>) -> Result<Self> {
        if sides.len() != self.n() {
            return Err(Error::Usage(format!(
                "bipartition length {} does not match n={}",
                sides.len(),
                self.n()
            )));
        }
        for (v, list) in self.adj.iter().enumerate() {
            for &u in list {
                if sides[v] == sides[u as usize] {
                    return Err(Error::Parse(format!(
                        "edge ({v}, {u}) does not cross the bipartition"
                    )));
                }
            }
        }
        self.bipartition = Some(sides);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree_of(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Neighbors of `v` in stored order.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors_sorted(&self, v: u32) -> &[u32] {
        &self.sorted[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let (a, b) = if self.degree_of(u) <= self.degree_of(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.sorted[a as usize].binary_search(&b).is_ok()
    }

    pub fn bipartition(&self) -> Option<&[Side]> {
        self.bipartition.as_deref()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Every edge once, as `(min, max)` pairs, ascending.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m);
        for (v, s) in self.sorted.iter().enumerate() {
            let v = v as u32;
            for &u in s {
                if v < u {
                    out.push((v, u));
                }
            }
        }
        out
    }

    /// Returns a copy with every vertex's neighbor list independently and
    /// uniformly permuted. The edge set is unchanged.
    pub fn shuffled_adjacency(&self, seed: u64) -> Graph {
        const SHUFFLE_TAG: u64 = 0x53_48_46_4C; // "SHFL"
        let mut adj = self.adj.clone();
        for (v, list) in adj.iter_mut().enumerate() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(crate::hash::hash64(seed, SHUFFLE_TAG, v as u64));
            // Fisher-Yates.
            for i in (1..list.len()).rev() {
                let j = rng.random_range(0..=i);
                list.swap(i, j);
            }
        }
        Graph {
            adj,
            sorted: self.sorted.clone(),
            m: self.m,
            bipartition: self.bipartition.clone(),
        }
    }

    /// Full consistency scan used by tests: simple, symmetric, sorted index
    /// agrees with stored adjacency, bipartition (if any) is proper.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = Graph::from_adjacency(self.adj.clone())?;
        if rebuilt.sorted != self.sorted {
            return Err(Error::Internal(
                "edge index out of sync with adjacency".into(),
            ));
        }
        if let Some(sides) = &self.bipartition {
            rebuilt.with_bipartition(sides.clone())?;
        }
        Ok(())
    }

    // ---- serialization ----

    /// Parses the edge-list format: a header line `n`, then one `u v` line
    /// per edge. An optional `sides <0/1 string>` line may follow the header.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty file".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad header line 1: {header:?}")))?;

        let mut sides: Option<Vec<Side>> = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in lines {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("sides ") {
                sides = Some(parse_sides(rest, n, lineno)?);
                continue;
            }
            let mut it = line.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => {
                    let u: u32 = a
                        .parse()
                        .map_err(|_| Error::Parse(format!("malformed line {lineno}: {line:?}")))?;
                    let v: u32 = b
                        .parse()
                        .map_err(|_| Error::Parse(format!("malformed line {lineno}: {line:?}")))?;
                    (u, v)
                }
                _ => return Err(Error::Parse(format!("malformed line {lineno}: {line:?}"))),
            };
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parse(format!(
                    "vertex out of range at line {lineno}"
                )));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop at line {lineno}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::Parse(format!("duplicate edge at line {lineno}")));
            }
            edges.push((u, v));
        }
        let g = Graph::from_edges(n, &edges)?;
        match sides {
            Some(s) => g.with_bipartition(s),
            None => Ok(g),
        }
    }

    /// Serializes to the edge-list format, one edge per line in ascending
    /// `(min, max)` order. Per-vertex adjacency order is NOT preserved.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n());
        if let Some(sides) = &self.bipartition {
            let _ = writeln!(out, "sides {}", sides_string(sides));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the adjacency format: header `n`, optional `sides` line, then
    /// exactly `n` lines, line `v` holding the neighbors of `v` in stored
    /// order (blank line for an isolated vertex).
    pub fn parse_adjacency(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty file".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad header line 1: {header:?}")))?;
        let mut rest: Vec<&str> = lines.collect();
        let mut sides = None;
        if let Some(first) = rest.first() {
            if let Some(s) = first.strip_prefix("sides ") {
                sides = Some(parse_sides(s, n, 2)?);
                rest.remove(0);
            }
        }
        if rest.len() < n {
            return Err(Error::Parse(format!(
                "expected {n} adjacency lines, found {}",
                rest.len()
            )));
        }
        let mut adj = Vec::with_capacity(n);
        for (v, line) in rest.iter().take(n).enumerate() {
            let mut list = Vec::new();
            for tok in line.split_whitespace() {
                let u: u32 = tok.parse().map_err(|_| {
                    Error::Parse(format!("bad neighbor {tok:?} on adjacency line for {v}"))
                })?;
                list.push(u);
            }
            adj.push(list);
        }
        let g = Graph::from_adjacency(adj)?;
        match sides {
            Some(s) => g.with_bipartition(s),
            None => Ok(g),
        }
    }

    /// Serializes to the adjacency format with stored order preserved, so a
    /// round trip reproduces the instance bit-for-bit.
    pub fn to_adjacency(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n());
        if let Some(sides) = &self.bipartition {
            let _ = writeln!(out, "sides {}", sides_string(sides));
        }
        for list in &self.adj {
            let mut first = true;
            for &u in list {
                if first {
                    let _ = write!(out, "{u}");
                    first = false;
                } else {
                    let _ = write!(out, " {u}");
                }
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn save_adjacency(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_adjacency())?;
        Ok(())
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn sides_string(sides: &[Side]) -> String {
    sides
        .iter()
        .map(|s| if *s == Side::V { '0' } else { '1' })
        .collect()
}

fn parse_sides(s: &str, n: usize, lineno: usize) -> Result<Vec<Side>> {
    let s = s.trim();
    if s.len() != n {
        return Err(Error::Parse(format!(
            "sides string at line {lineno} has length {}, expected {n}",
            s.len()
        )));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(Side::V),
            '1' => Ok(Side::U),
            _ => Err(Error::Parse(format!(
                "bad side character {c:?} at line {lineno}"
            ))),
        })
        .collect()
}

/// Loads a graph from a file, dispatching on content: `u v` edge lines
/// (edge-list format) vs per-vertex neighbor lines (adjacency format).
/// Adjacency files are detected by the `.adj` extension; everything else is
/// parsed as an edge list.
pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("adj") {
        Graph::parse_adjacency(&text)
    } else {
        Graph::parse_edge_list(&text)
    }
}

/// Loads an edge-list file (header `n`, then `u v` lines).
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    Graph::parse_edge_list(&fs::read_to_string(path)?)
}

/// A graph plus query counters and a seeded deterministic random source.
/// All algorithmic access to the graph goes through a session; two sessions
/// with the same graph and seed answer identical call sequences identically.
pub struct OracleSession<'g> {
    graph: &'g Graph,
    list_queries: u64,
    pair_queries: u64,
    rng: rand_chacha::ChaCha8Rng,
    seed: u64,
}

impl<'g> OracleSession<'g> {
    pub fn new(graph: &'g Graph, seed: u64) -> Self {
        OracleSession {
            graph,
            list_queries: 0,
            pair_queries: 0,
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// List-model query: the `i`'th stored neighbor of `v` (1-based), or
    /// `None` if `v` has fewer than `i` neighbors. Counts one list query
    /// either way.
    pub fn adj_list_query(&mut self, v: u32, i: usize) -> Result<Option<u32>> {
        if v as usize >= self.graph.n() {
            return Err(Error::Usage(format!("vertex {v} out of range")));
        }
        if i == 0 {
            return Err(Error::Usage("list index is 1-based".into()));
        }
        self.list_queries += 1;
        Ok(self.graph.neighbors(v).get(i - 1).copied())
    }

    /// Matrix-model query: whether the edge `(u, v)` exists. Counts one pair
    /// query.
    pub fn pair_query(&mut self, u: u32, v: u32) -> Result<bool> {
        if u as usize >= self.graph.n() || v as usize >= self.graph.n() {
            return Err(Error::Usage(format!("pair ({u}, {v}) out of range")));
        }
        if u == v {
            return Err(Error::Usage("pair query on identical vertices".into()));
        }
        self.pair_queries += 1;
        Ok(self.graph.has_edge(u, v))
    }

    /// Exact degree in the list model, charged as `ceil(log2 n) + 1` list
    /// queries (the cost of locating the end of the list by binary search).
    pub fn degree(&mut self, v: u32) -> Result<usize> {
        if v as usize >= self.graph.n() {
            return Err(Error::Usage(format!("vertex {v} out of range")));
        }
        self.list_queries += degree_query_cost(self.graph.n());
        Ok(self.graph.degree_of(v))
    }

    /// Current counters as `(list_queries, pair_queries)`.
    pub fn query_counts(&self) -> (u64, u64) {
        (self.list_queries, self.pair_queries)
    }

    /// Uniform random vertex from the session's deterministic stream.
    pub fn sample_vertex(&mut self) -> u32 {
        self.rng.random_range(0..self.graph.n() as u32)
    }

    /// Uniform ordered pair of distinct vertices.
    pub fn sample_pair(&mut self) -> (u32, u32) {
        let n = self.graph.n() as u32;
        let u = self.rng.random_range(0..n);
        let mut v = self.rng.random_range(0..n);
        while v == u {
            v = self.rng.random_range(0..n);
        }
        (u, v)
    }

    pub fn rng_mut(&mut self) -> &mut rand_chacha::ChaCha8Rng {
        &mut self.rng
    }
}

/// List queries charged for one exact-degree lookup on an `n`-vertex graph.
pub fn degree_query_cost(n: usize) -> u64 {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as u64 + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::parse_edge_list("3\n0 1\n1 2\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 2);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        let g2 = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g2.edges(), g.edges());
    }

    #[test]
    fn rejects_self_loop_naming_line() {
        let err = Graph::parse_edge_list("2\n0 0\n").unwrap_err();
        assert!(err.to_string().contains("self-loop at line 2"), "{err}");
    }

    #[test]
    fn rejects_duplicate_edge() {
        let err = Graph::parse_edge_list("4\n0 1\n0 1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
        // Also in reversed orientation.
        let err = Graph::parse_edge_list("4\n0 1\n1 0\n").unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_and_malformed() {
        assert!(Graph::parse_edge_list("2\n0 5\n").is_err());
        assert!(Graph::parse_edge_list("2\n0 x\n").is_err());
        assert!(Graph::parse_edge_list("2\n0\n").is_err());
    }

    #[test]
    fn adjacency_round_trip_preserves_order() {
        let g = Graph::from_adjacency(vec![vec![2, 1], vec![0], vec![0]]).unwrap();
        let text = g.to_adjacency();
        let g2 = Graph::parse_adjacency(&text).unwrap();
        assert_eq!(g2.neighbors(0), &[2, 1]);
        assert_eq!(text, g2.to_adjacency());
    }

    #[test]
    fn adj_list_query_semantics_and_accounting() {
        let g = path3();
        let mut s = OracleSession::new(&g, 7);
        // Second stored neighbor of the middle vertex.
        assert_eq!(s.adj_list_query(1, 2).unwrap(), Some(g.neighbors(1)[1]));
        // Out-of-list index answers None but still counts.
        assert_eq!(s.adj_list_query(0, 5).unwrap(), None);
        assert_eq!(s.query_counts(), (2, 0));

        let single = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut s = OracleSession::new(&single, 0);
        assert_eq!(s.query_counts(), (0, 0));
        assert_eq!(s.adj_list_query(0, 1).unwrap(), Some(1));
        assert_eq!(s.query_counts(), (1, 0));
    }

    #[test]
    fn isolated_vertex_list_query_is_none() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let mut s = OracleSession::new(&g, 1);
        for i in 1..4 {
            assert_eq!(s.adj_list_query(0, i).unwrap(), None);
        }
        assert_eq!(s.query_counts(), (3, 0));
    }

    #[test]
    fn pair_query_semantics() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let mut s = OracleSession::new(&g, 1);
        assert!(s.pair_query(0, 1).unwrap());
        assert!(!s.pair_query(0, 2).unwrap());
        assert!(s.pair_query(1, 0).unwrap());
        for _ in 0..2 {
            let _ = s.pair_query(1, 2).unwrap();
        }
        assert_eq!(s.query_counts(), (0, 5));
        assert!(s.pair_query(1, 1).is_err());
        // Usage errors are not counted.
        assert_eq!(s.query_counts(), (0, 5));
    }

    #[test]
    fn degree_binary_search_charge() {
        // Star K_{1,4}: center has degree 4; n=5 charges ceil(log2 5)+1 = 4.
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let mut s = OracleSession::new(&g, 0);
        assert_eq!(s.degree(0).unwrap(), 4);
        assert_eq!(s.query_counts(), (4, 0));
        assert_eq!(s.degree(1).unwrap(), 1);
        assert_eq!(s.query_counts(), (8, 0));

        let g = Graph::from_edges(4, &[]).unwrap();
        let mut s = OracleSession::new(&g, 0);
        assert_eq!(s.degree(2).unwrap(), 0);
        assert_eq!(s.query_counts(), (3, 0)); // ceil(log2 4)+1
    }

    #[test]
    fn sessions_are_deterministic() {
        let g = path3();
        let mut a = OracleSession::new(&g, 99);
        let mut b = OracleSession::new(&g, 99);
        for _ in 0..50 {
            assert_eq!(a.sample_pair(), b.sample_pair());
            assert_eq!(a.sample_vertex(), b.sample_vertex());
        }
        let (u, v) = a.sample_pair();
        let _ = a.pair_query(u, v).unwrap();
        let (u, v) = b.sample_pair();
        let _ = b.pair_query(u, v).unwrap();
        assert_eq!(a.query_counts(), b.query_counts());
    }

    #[test]
    fn shuffle_preserves_edge_set() {
        let g = Graph::from_edges(11, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6)]).unwrap();
        let s = g.shuffled_adjacency(5);
        assert_eq!(s.edges(), g.edges());
        let mut a = g.neighbors(0).to_vec();
        let mut b = s.neighbors(0).to_vec();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        s.validate().unwrap();
    }

    #[test]
    fn bipartition_rejects_same_side_edge() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(g
            .clone()
            .with_bipartition(vec![Side::V, Side::U, Side::V])
            .is_ok());
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(g.with_bipartition(vec![Side::V, Side::V, Side::U]).is_err());
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        assert!(Graph::from_adjacency(vec![vec![1], vec![]]).is_err());
    }
}
