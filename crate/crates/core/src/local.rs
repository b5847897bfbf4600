//! Per-vertex local computation over subgraphs that are never materialized
//! globally.
//!
//! The central object is [`LcaRun`]: a memoized context that answers whether
//! a vertex is matched in a fixed, seed-determined matching of a derived
//! subgraph. The derived subgraph is either G' (the bounded-edge-degree
//! subgraph H plus all underfull edges) or its restriction to edges between
//! low- and mid-H-degree vertices. Vertices whose estimated derived degree
//! exceeds a cutoff are deleted first.
//!
//! The matching itself is built in phases: phase 1 is a random-greedy maximal
//! matching under hashed edge ranks; phase p >= 2 flips a maximal
//! rank-greedy set of vertex-disjoint augmenting paths of length exactly
//! 2p - 1. A matching with no augmenting path of length at most 2P - 1 has
//! size at least (1 - 1/(P+1)) times the optimum, which is the guarantee the
//! estimators rely on. All internal randomness is derived from (seed, vertex
//! ids), never from call order, so answers are consistent across calls and
//! identical for identical seeds.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edcs::{in_g_prime, EdcsState};
use crate::error::{Error, Result};
use crate::graph::{Graph, OracleSession, QueryModel};
use crate::hash::{hash64, hash_words};

const TAG_DEG: u64 = 0x44_45_47_31;
const TAG_EDGE: u64 = 0x4D_31_45_44;
const TAG_PATH: u64 = 0x50_41_54_48;

/// Tuning for the local matching oracle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LcaConfig {
    pub epsilon: f64,
    /// Vertex samples per degree estimate.
    pub degree_sample_count: usize,
    /// Vertices with estimated derived degree above this are deleted.
    pub degree_cutoff: f64,
    /// Number of augmentation phases; the matching guarantee is
    /// 1 - 1/(phase_count + 1).
    pub phase_count: usize,
    pub seed: u64,
}

impl LcaConfig {
    /// Formula-driven values: k = ceil(100 * n^(1-eps^3) * log2(n)^2),
    /// cutoff = n^(eps^3) * log2(n)^2, phase_count = ceil(1/eps).
    pub fn asymptotic(n: usize, epsilon: f64, seed: u64) -> Self {
        let nf = n.max(2) as f64;
        let l2 = nf.log2();
        LcaConfig {
            epsilon,
            degree_sample_count: (100.0 * nf.powf(1.0 - epsilon.powi(3)) * l2 * l2).ceil() as usize,
            degree_cutoff: nf.powf(epsilon.powi(3)) * l2 * l2,
            phase_count: (1.0 / epsilon).ceil() as usize,
            seed,
        }
    }

    /// Desk-scale defaults: k = ceil(4 * log2(n)^2) samples per degree
    /// estimate, the same cutoff formula, phase_count = ceil(1/eps).
    pub fn practical(n: usize, epsilon: f64, seed: u64) -> Self {
        let nf = n.max(2) as f64;
        let l2 = nf.log2();
        LcaConfig {
            epsilon,
            degree_sample_count: ((4.0 * l2 * l2).ceil() as usize).max(32),
            degree_cutoff: nf.powf(epsilon.powi(3)) * l2 * l2,
            phase_count: (1.0 / epsilon).ceil() as usize,
            seed,
        }
    }
}

/// Which derived subgraph a run operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// G' = H plus underfull edges.
    GPrime,
    /// G' edges with one endpoint of low H-degree ([0, 0.2*beta]) and one of
    /// mid H-degree ([0.4*beta, 0.6*beta]).
    MidLow,
}

/// H-degree class of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegClass {
    Low,
    Mid,
    Other,
}

pub fn deg_class(state: &EdcsState, v: u32) -> DegClass {
    let beta = state.params().beta as f64;
    let d = state.h_degree(v) as f64;
    if d <= 0.2 * beta {
        DegClass::Low
    } else if 0.4 * beta <= d && d <= 0.6 * beta {
        DegClass::Mid
    } else {
        DegClass::Other
    }
}

/// Classification of a vertex relative to the mid-degree set and the fixed
/// matching of the low-mid subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MidClass {
    /// Mid-degree and unmatched.
    A,
    /// Mid-degree and matched.
    B,
    NotMid,
}

type PathKey = Vec<u32>;
type CandList = Rc<Vec<(u64, PathKey)>>;

/// Memoized local-computation context. One run pins one matching; all
/// answers within a run are mutually consistent. Query costs are charged to
/// the session passed into each call; materializations are cached so each
/// vertex is paid for once per run.
pub struct LcaRun<'e> {
    state: &'e EdcsState,
    config: LcaConfig,
    selector: Selector,
    model: QueryModel,
    /// For `MidLow` runs: mid vertices removed from the live set (the
    /// derived subgraph shrinks accordingly).
    removed_mid: Vec<bool>,
    g_adj: HashMap<u32, Rc<Vec<u32>>>,
    g_adj_sets: HashMap<u32, Rc<HashSet<u32>>>,
    deg_est: HashMap<u32, f64>,
    f_adj: HashMap<u32, Rc<Vec<u32>>>,
    /// partner[p][v] for phases 1..=phase_count (index 0 unused).
    partner: Vec<HashMap<u32, Option<u32>>>,
    edge_m1: HashMap<(u32, u32), bool>,
    candidates: Vec<HashMap<u32, CandList>>,
    selected: HashMap<(usize, PathKey), bool>,
}

impl<'e> LcaRun<'e> {
    pub fn new(
        state: &'e EdcsState,
        config: LcaConfig,
        selector: Selector,
        model: QueryModel,
    ) -> Self {
        let phases = config.phase_count.max(1);
        LcaRun {
            state,
            config,
            selector,
            model,
            removed_mid: vec![false; state.n()],
            g_adj: HashMap::new(),
            g_adj_sets: HashMap::new(),
            deg_est: HashMap::new(),
            f_adj: HashMap::new(),
            partner: vec![HashMap::new(); phases + 1],
            edge_m1: HashMap::new(),
            candidates: vec![HashMap::new(); phases + 1],
            selected: HashMap::new(),
        }
    }

    /// Marks mid vertices as removed from the live set. Only affects
    /// `MidLow` runs, and must be done before querying.
    pub fn with_removed_mid(mut self, removed: &[u32]) -> Self {
        for &v in removed {
            if (v as usize) < self.removed_mid.len() {
                self.removed_mid[v as usize] = true;
            }
        }
        self
    }

    pub fn config(&self) -> &LcaConfig {
        &self.config
    }

    pub fn state(&self) -> &EdcsState {
        self.state
    }

    fn n(&self) -> usize {
        self.state.n()
    }

    /// Materialized G-adjacency of `v` (sorted), charged once per vertex:
    /// n-1 pair queries in the matrix model, a degree lookup plus deg(v)
    /// list queries in the list model.
    fn g_neighbors(&mut self, sess: &mut OracleSession, v: u32) -> Result<Rc<Vec<u32>>> {
        if let Some(list) = self.g_adj.get(&v) {
            return Ok(Rc::clone(list));
        }
        let mut list = Vec::new();
        match self.model {
            QueryModel::Matrix => {
                for u in 0..self.n() as u32 {
                    if u != v && sess.pair_query(v, u)? {
                        list.push(u);
                    }
                }
            }
            QueryModel::List => {
                let deg = sess.degree(v)?;
                for i in 1..=deg {
                    let u = sess
                        .adj_list_query(v, i)?
                        .ok_or_else(|| Error::Internal("degree/list mismatch".into()))?;
                    list.push(u);
                }
                list.sort_unstable();
            }
        }
        let rc = Rc::new(list);
        self.g_adj.insert(v, Rc::clone(&rc));
        Ok(rc)
    }

    fn g_neighbor_set(&mut self, sess: &mut OracleSession, v: u32) -> Result<Rc<HashSet<u32>>> {
        if let Some(set) = self.g_adj_sets.get(&v) {
            return Ok(Rc::clone(set));
        }
        let list = self.g_neighbors(sess, v)?;
        let set = Rc::new(list.iter().copied().collect::<HashSet<u32>>());
        self.g_adj_sets.insert(v, Rc::clone(&set));
        Ok(set)
    }

    /// Whether the confirmed G-edge (v, u) belongs to the derived subgraph
    /// (ignoring the degree filter).
    fn selector_edge(&self, v: u32, u: u32) -> bool {
        if !in_g_prime(self.state, v, u) {
            return false;
        }
        match self.selector {
            Selector::GPrime => true,
            Selector::MidLow => {
                let (cv, cu) = (self.class_live(v), self.class_live(u));
                matches!(
                    (cv, cu),
                    (DegClass::Low, DegClass::Mid) | (DegClass::Mid, DegClass::Low)
                )
            }
        }
    }

    /// Degree class with live-set removal applied to mid vertices.
    fn class_live(&self, v: u32) -> DegClass {
        let c = deg_class(self.state, v);
        if c == DegClass::Mid && self.removed_mid[v as usize] {
            DegClass::Other
        } else {
            c
        }
    }

    /// Whether `v` belongs to the derived subgraph's vertex set at all
    /// (before the degree filter).
    fn selector_vertex(&self, v: u32) -> bool {
        match self.selector {
            Selector::GPrime => true,
            Selector::MidLow => matches!(self.class_live(v), DegClass::Low | DegClass::Mid),
        }
    }

    /// Estimated derived-subgraph degree of `v`: sample k uniform vertices u
    /// and return n * |hits| / k, where a hit is a sampled u with (v, u) an
    /// edge of the derived subgraph. The sampling stream depends only on
    /// (seed, v), so the estimate is call-order independent.
    pub fn estimate_degree(&mut self, sess: &mut OracleSession, v: u32) -> Result<f64> {
        if let Some(&d) = self.deg_est.get(&v) {
            return Ok(d);
        }
        let n = self.n();
        let k = self.config.degree_sample_count.max(1);
        let mut hits = 0usize;
        if n > 1 && self.selector_vertex(v) {
            let mut rng = ChaCha8Rng::seed_from_u64(hash64(self.config.seed, TAG_DEG, v as u64));
            match self.model {
                QueryModel::Matrix => {
                    for _ in 0..k {
                        let u = rng.random_range(0..n as u32);
                        if u == v {
                            continue;
                        }
                        if sess.pair_query(v, u)? && self.selector_edge(v, u) {
                            hits += 1;
                        }
                    }
                }
                QueryModel::List => {
                    // One full read of v's list, then set membership.
                    let set = self.g_neighbor_set(sess, v)?;
                    for _ in 0..k {
                        let u = rng.random_range(0..n as u32);
                        if u != v && set.contains(&u) && self.selector_edge(v, u) {
                            hits += 1;
                        }
                    }
                }
            }
        }
        let est = n as f64 * hits as f64 / k as f64;
        self.deg_est.insert(v, est);
        Ok(est)
    }

    /// Degree-filter survival: the vertex is in the derived subgraph and its
    /// estimated degree does not exceed the cutoff.
    pub fn kept(&mut self, sess: &mut OracleSession, v: u32) -> Result<bool> {
        if !self.selector_vertex(v) {
            return Ok(false);
        }
        Ok(self.estimate_degree(sess, v)? <= self.config.degree_cutoff)
    }

    /// Adjacency of `v` in the filtered derived subgraph, sorted ascending.
    pub fn f_neighbors(&mut self, sess: &mut OracleSession, v: u32) -> Result<Rc<Vec<u32>>> {
        if let Some(list) = self.f_adj.get(&v) {
            return Ok(Rc::clone(list));
        }
        let mut out = Vec::new();
        if self.kept(sess, v)? {
            let gn = self.g_neighbors(sess, v)?;
            for &u in gn.iter() {
                if self.selector_edge(v, u) && self.kept(sess, u)? {
                    out.push(u);
                }
            }
            out.sort_unstable();
        }
        let rc = Rc::new(out);
        self.f_adj.insert(v, Rc::clone(&rc));
        Ok(rc)
    }

    fn edge_rank_p1(&self, u: u32, v: u32) -> crate::exact::EdgeRankKey {
        let (a, b) = (u.min(v), u.max(v));
        (
            hash_words(self.config.seed, &[TAG_EDGE, a as u64, b as u64]),
            a,
            b,
        )
    }

    /// Phase-1 membership: (u, v) survives the random-greedy order iff every
    /// lower-ranked adjacent edge loses.
    fn edge_in_m1(
        &mut self,
        sess: &mut OracleSession,
        u: u32,
        v: u32,
        depth: usize,
    ) -> Result<bool> {
        let key = (u.min(v), u.max(v));
        if let Some(&r) = self.edge_m1.get(&key) {
            return Ok(r);
        }
        if depth > self.n() + 64 {
            return Err(Error::Internal(
                "phase-1 recursion exceeded depth cap".into(),
            ));
        }
        let my_rank = self.edge_rank_p1(u, v);
        let mut lower: Vec<(crate::exact::EdgeRankKey, (u32, u32))> = Vec::new();
        for x in [u, v] {
            let nbrs = self.f_neighbors(sess, x)?;
            for &w in nbrs.iter() {
                if (x == u && w == v) || (x == v && w == u) {
                    continue;
                }
                let r = self.edge_rank_p1(x, w);
                if r < my_rank {
                    lower.push((r, (x, w)));
                }
            }
        }
        lower.sort_unstable();
        lower.dedup_by_key(|&mut (r, _)| r);
        let mut result = true;
        for (_, (x, w)) in lower {
            if self.edge_in_m1(sess, x, w, depth + 1)? {
                result = false;
                break;
            }
        }
        self.edge_m1.insert(key, result);
        Ok(result)
    }

    fn partner_phase1(&mut self, sess: &mut OracleSession, v: u32) -> Result<Option<u32>> {
        if let Some(&p) = self.partner[1].get(&v) {
            return Ok(p);
        }
        let nbrs = self.f_neighbors(sess, v)?;
        let mut ranked: Vec<((u64, u32, u32), u32)> =
            nbrs.iter().map(|&u| (self.edge_rank_p1(v, u), u)).collect();
        ranked.sort_unstable();
        let mut partner = None;
        for (_, u) in ranked {
            if self.edge_in_m1(sess, v, u, 0)? {
                partner = Some(u);
                break;
            }
        }
        self.partner[1].insert(v, partner);
        Ok(partner)
    }

    /// Partner of `v` in the matching after `p` phases.
    fn partner_at(&mut self, sess: &mut OracleSession, p: usize, v: u32) -> Result<Option<u32>> {
        if p == 1 {
            return self.partner_phase1(sess, v);
        }
        if let Some(&ans) = self.partner[p].get(&v) {
            return Ok(ans);
        }
        let ans = match self.selected_path_through(sess, p, v)? {
            Some(path) => {
                let j = path
                    .iter()
                    .position(|&x| x == v)
                    .expect("path contains its vertex");
                // After flipping, even positions pair rightward and odd
                // positions pair leftward.
                if j % 2 == 0 {
                    Some(path[j + 1])
                } else {
                    Some(path[j - 1])
                }
            }
            None => self.partner_at(sess, p - 1, v)?,
        };
        self.partner[p].insert(v, ans);
        Ok(ans)
    }

    fn path_rank(&self, p: usize, key: &[u32]) -> u64 {
        let mut words = Vec::with_capacity(key.len() + 2);
        words.push(TAG_PATH);
        words.push(p as u64);
        words.extend(key.iter().map(|&x| x as u64));
        hash_words(self.config.seed, &words)
    }

    /// All valid augmenting paths of the phase-(p-1) matching with exactly
    /// 2p - 1 edges that contain `v`, as (rank, canonical vertex sequence),
    /// sorted ascending.
    fn candidates_through(
        &mut self,
        sess: &mut OracleSession,
        p: usize,
        v: u32,
    ) -> Result<CandList> {
        if let Some(c) = self.candidates[p].get(&v) {
            return Ok(Rc::clone(c));
        }
        let mut found: HashSet<PathKey> = HashSet::new();
        let positions = 2 * p; // vertices on a path with 2p-1 edges
        if self.kept(sess, v)? {
            for j in 0..positions {
                // Left part: positions j down to 0; right part: j up to 2p-1.
                let lefts = self.extend_paths(sess, p, vec![v], j, false)?;
                if lefts.is_empty() {
                    continue;
                }
                for left in &lefts {
                    // `left` is ordered u_0 .. u_j.
                    let rights = self.extend_paths(sess, p, left.clone(), j, true)?;
                    for full in rights {
                        debug_assert_eq!(full.len(), positions);
                        let mut canon = full.clone();
                        let rev: Vec<u32> = full.iter().rev().copied().collect();
                        if rev < canon {
                            canon = rev;
                        }
                        found.insert(canon);
                    }
                }
            }
        }
        let mut list: Vec<(u64, PathKey)> = found
            .into_iter()
            .map(|key| (self.path_rank(p, &key), key))
            .collect();
        list.sort_unstable();
        let rc = Rc::new(list);
        self.candidates[p].insert(v, Rc::clone(&rc));
        Ok(rc)
    }

    /// Extends a partial path of a phase-p candidate. With `forward ==
    /// false`, `partial` holds `u_i..=u_anchor` with `partial[0]` the
    /// current left end; extension prepends u_{i-1} until position 0, which
    /// must be free in the phase-(p-1) matching. With `forward == true`,
    /// `partial` holds `u_0..=u_cur` and appends until position 2p-1, which
    /// must be free as well. Edge e_k (between u_k and u_{k+1}) is matched
    /// iff k is odd; matched steps are forced through the partner oracle,
    /// unmatched steps branch over filtered neighbors.
    fn extend_paths(
        &mut self,
        sess: &mut OracleSession,
        p: usize,
        partial: Vec<u32>,
        anchor: usize,
        forward: bool,
    ) -> Result<Vec<Vec<u32>>> {
        let total_positions = 2 * p;
        let mut out = Vec::new();
        // Work queue of partial paths, each with its current end position.
        struct Item {
            seq: Vec<u32>,
            pos: usize,
        }
        let init_pos = if forward { partial.len() - 1 } else { anchor };
        let mut queue = vec![Item {
            seq: partial,
            pos: init_pos,
        }];
        while let Some(Item { seq, pos }) = queue.pop() {
            if forward {
                if pos == total_positions - 1 {
                    // Right endpoint must be free in phase p-1.
                    let end = *seq.last().unwrap();
                    if self.partner_at(sess, p - 1, end)?.is_none() {
                        out.push(seq);
                    }
                    continue;
                }
                let cur = *seq.last().unwrap();
                let edge_idx = pos; // edge e_pos between u_pos and u_{pos+1}
                if edge_idx % 2 == 1 {
                    // Matched edge: forced continuation.
                    if let Some(w) = self.partner_at(sess, p - 1, cur)? {
                        if !seq.contains(&w) {
                            let mut s = seq;
                            s.push(w);
                            queue.push(Item {
                                seq: s,
                                pos: pos + 1,
                            });
                        }
                    }
                } else {
                    let mate = self.partner_at(sess, p - 1, cur)?;
                    let nbrs = self.f_neighbors(sess, cur)?;
                    for &w in nbrs.iter() {
                        if Some(w) == mate || seq.contains(&w) {
                            continue;
                        }
                        let mut s = seq.clone();
                        s.push(w);
                        queue.push(Item {
                            seq: s,
                            pos: pos + 1,
                        });
                    }
                }
            } else {
                if pos == 0 {
                    // Left endpoint must be free in phase p-1.
                    let end = seq[0];
                    if self.partner_at(sess, p - 1, end)?.is_none() {
                        out.push(seq);
                    }
                    continue;
                }
                let cur = seq[0];
                let edge_idx = pos - 1; // edge e_{pos-1} between u_{pos-1} and u_pos
                if edge_idx % 2 == 1 {
                    if let Some(w) = self.partner_at(sess, p - 1, cur)? {
                        if !seq.contains(&w) {
                            let mut s = vec![w];
                            s.extend_from_slice(&seq);
                            queue.push(Item {
                                seq: s,
                                pos: pos - 1,
                            });
                        }
                    }
                } else {
                    let mate = self.partner_at(sess, p - 1, cur)?;
                    let nbrs = self.f_neighbors(sess, cur)?;
                    for &w in nbrs.iter() {
                        if Some(w) == mate || seq.contains(&w) {
                            continue;
                        }
                        let mut s = Vec::with_capacity(seq.len() + 1);
                        s.push(w);
                        s.extend_from_slice(&seq);
                        queue.push(Item {
                            seq: s,
                            pos: pos - 1,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Greedy selection: a path wins iff every lower-ranked path sharing a
    /// vertex with it loses.
    fn path_selected(&mut self, sess: &mut OracleSession, p: usize, key: &PathKey) -> Result<bool> {
        if let Some(&r) = self.selected.get(&(p, key.clone())) {
            return Ok(r);
        }
        let my_rank = self.path_rank(p, key);
        let mut conflicting: Vec<(u64, PathKey)> = Vec::new();
        let mut seen: HashSet<PathKey> = HashSet::new();
        for &u in key.iter() {
            let cands = self.candidates_through(sess, p, u)?;
            for (r, k) in cands.iter() {
                if (*r, k) < (my_rank, key) && !seen.contains(k) {
                    seen.insert(k.clone());
                    conflicting.push((*r, k.clone()));
                }
            }
        }
        conflicting.sort_unstable();
        let mut result = true;
        for (_, k) in conflicting {
            if self.path_selected(sess, p, &k)? {
                result = false;
                break;
            }
        }
        self.selected.insert((p, key.clone()), result);
        Ok(result)
    }

    /// The selected phase-p path through `v`, if any. At most one exists.
    fn selected_path_through(
        &mut self,
        sess: &mut OracleSession,
        p: usize,
        v: u32,
    ) -> Result<Option<PathKey>> {
        let cands = self.candidates_through(sess, p, v)?;
        for (_, key) in cands.iter() {
            if self.path_selected(sess, p, key)? {
                return Ok(Some(key.clone()));
            }
        }
        Ok(None)
    }

    /// Whether `v` is matched in the fixed phased matching of the filtered
    /// derived subgraph.
    pub fn lca_matched(&mut self, sess: &mut OracleSession, v: u32) -> Result<bool> {
        Ok(self.lca_partner(sess, v)?.is_some())
    }

    /// Partner of `v` in the fixed phased matching, if matched.
    pub fn lca_partner(&mut self, sess: &mut OracleSession, v: u32) -> Result<Option<u32>> {
        if v as usize >= self.n() {
            return Err(Error::Usage(format!("vertex {v} out of range")));
        }
        if !self.kept(sess, v)? {
            return Ok(None);
        }
        let phases = self.config.phase_count.max(1);
        self.partner_at(sess, phases, v)
    }

    /// Classification against the mid-degree window and the fixed matching:
    /// `NotMid` when deg_H(v) is outside [0.4*beta, 0.6*beta] (or v was
    /// removed from the live set), otherwise `A` iff v is unmatched.
    pub fn classify_mid(&mut self, sess: &mut OracleSession, v: u32) -> Result<MidClass> {
        debug_assert_eq!(self.selector, Selector::MidLow);
        if self.class_live(v) != DegClass::Mid {
            return Ok(MidClass::NotMid);
        }
        Ok(if self.lca_matched(sess, v)? {
            MidClass::B
        } else {
            MidClass::A
        })
    }
}

/// Standalone estimate of deg_{G'}(v) by uniform vertex sampling; equals the
/// value an `LcaRun` with the same config would cache, since the sampling
/// stream depends only on (seed, v).
pub fn estimate_degree_gprime(
    sess: &mut OracleSession,
    state: &EdcsState,
    v: u32,
    config: LcaConfig,
    model: QueryModel,
) -> Result<f64> {
    let mut run = LcaRun::new(state, config, Selector::GPrime, model);
    run.estimate_degree(sess, v)
}

// ---------------------------------------------------------------------------
// Random greedy maximal matching, simulated locally.
// ---------------------------------------------------------------------------

/// Neighbors handed to the random-greedy simulator: real vertices or virtual
/// degree-1 dummies owned by the vertex being expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgmmNeighbor {
    Real(u32),
    /// The `idx`-th dummy attached to the expanded vertex.
    Dummy(u32),
}

/// Identity of an edge in the simulated graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeId {
    Real(u32, u32),
    Dummy { owner: u32, idx: u32 },
}

impl EdgeId {
    fn real(u: u32, v: u32) -> Self {
        EdgeId::Real(u.min(v), u.max(v))
    }

    /// Rank key: hashed rank, then a kind discriminant (real edges first on
    /// the astronomically unlikely tie), then ids.
    fn rank(&self, seed: u64) -> (u64, u8, u32, u32) {
        match *self {
            EdgeId::Real(a, b) => (hash64(seed, a as u64, b as u64), 0, a, b),
            EdgeId::Dummy { owner, idx } => (hash64(seed, owner as u64, idx as u64), 1, owner, idx),
        }
    }
}

/// Local simulation of the random greedy maximal matching under the shared
/// hashed edge ranks. Memoization lives inside one simulator: one simulator
/// = one logical run; never reuse across independent trials.
pub struct RgmmSim {
    seed: u64,
    memo: HashMap<EdgeId, bool>,
    neighbors: HashMap<u32, Rc<Vec<RgmmNeighbor>>>,
    depth_cap: usize,
}

impl RgmmSim {
    pub fn new(seed: u64, depth_cap: usize) -> Self {
        RgmmSim {
            seed,
            memo: HashMap::new(),
            neighbors: HashMap::new(),
            depth_cap,
        }
    }

    fn fetch<F>(&mut self, v: u32, fetch: &mut F) -> Result<Rc<Vec<RgmmNeighbor>>>
    where
        F: FnMut(u32) -> Result<Vec<RgmmNeighbor>>,
    {
        if let Some(l) = self.neighbors.get(&v) {
            return Ok(Rc::clone(l));
        }
        let rc = Rc::new(fetch(v)?);
        self.neighbors.insert(v, Rc::clone(&rc));
        Ok(rc)
    }

    fn incident(
        &mut self,
        v: u32,
        fetch: &mut impl FnMut(u32) -> Result<Vec<RgmmNeighbor>>,
    ) -> Result<Vec<EdgeId>> {
        let nbrs = self.fetch(v, fetch)?;
        Ok(nbrs
            .iter()
            .map(|&nb| match nb {
                RgmmNeighbor::Real(u) => EdgeId::real(v, u),
                RgmmNeighbor::Dummy(idx) => EdgeId::Dummy { owner: v, idx },
            })
            .collect())
    }

    fn edge_matched(
        &mut self,
        e: EdgeId,
        fetch: &mut impl FnMut(u32) -> Result<Vec<RgmmNeighbor>>,
        depth: usize,
    ) -> Result<bool> {
        if let Some(&r) = self.memo.get(&e) {
            return Ok(r);
        }
        if depth > self.depth_cap {
            return Err(Error::Internal(
                "rgmm recursion exceeded depth cap (rank cycle?)".into(),
            ));
        }
        let my_rank = e.rank(self.seed);
        // A dummy edge's only real endpoint is its owner.
        let eps: Vec<u32> = match e {
            EdgeId::Real(a, b) => vec![a, b],
            EdgeId::Dummy { owner, .. } => vec![owner],
        };
        let mut lower: Vec<((u64, u8, u32, u32), EdgeId)> = Vec::new();
        for x in eps {
            for e2 in self.incident(x, fetch)? {
                if e2 == e {
                    continue;
                }
                let r = e2.rank(self.seed);
                if r < my_rank {
                    lower.push((r, e2));
                }
            }
        }
        lower.sort_unstable();
        lower.dedup_by_key(|&mut (r, _)| r);
        let mut result = true;
        for (_, e2) in lower {
            if self.edge_matched(e2, fetch, depth + 1)? {
                result = false;
                break;
            }
        }
        self.memo.insert(e, result);
        Ok(result)
    }

    /// The edge matching `v`, if any: scan v's incident edges in rank order
    /// and return the first winner.
    pub fn vertex_partner_edge(
        &mut self,
        v: u32,
        fetch: &mut impl FnMut(u32) -> Result<Vec<RgmmNeighbor>>,
    ) -> Result<Option<EdgeId>> {
        let mut incident: Vec<((u64, u8, u32, u32), EdgeId)> = self
            .incident(v, fetch)?
            .into_iter()
            .map(|e| (e.rank(self.seed), e))
            .collect();
        incident.sort_unstable();
        for (_, e) in incident {
            if self.edge_matched(e, fetch, 0)? {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    pub fn vertex_matched(
        &mut self,
        v: u32,
        fetch: &mut impl FnMut(u32) -> Result<Vec<RgmmNeighbor>>,
    ) -> Result<bool> {
        Ok(self.vertex_partner_edge(v, fetch)?.is_some())
    }
}

/// Local random-greedy matched-status on a materialized graph. Agrees
/// exactly with [`crate::exact::rgmm_global`] under the same seed.
pub fn rgmm_local_matched(g: &Graph, v: u32, seed: u64) -> Result<bool> {
    let mut sim = RgmmSim::new(seed, g.n() + 64);
    let mut fetch = |x: u32| -> Result<Vec<RgmmNeighbor>> {
        Ok(g.neighbors_sorted(x)
            .iter()
            .map(|&u| RgmmNeighbor::Real(u))
            .collect())
    };
    sim.vertex_matched(v, &mut fetch)
}
