//! Seeded instance generators: the layered YES/NO hard-instance family, a
//! near-regular bipartite sampler with forbidden pairs, and random graphs
//! for test corpora.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Side};
use crate::hash::hash64;

const TAG_PERM: u64 = 0x50_45_52_4D;
const TAG_REG: u64 = 0x52_45_47_31;
const TAG_ER: u64 = 0x45_52_44_53;
const TAG_SHUF: u64 = 0x53_48_55_46;

/// Structural part a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    A,
    B,
    S,
    T,
}

impl Part {
    pub fn letter(self) -> char {
        match self {
            Part::A => 'A',
            Part::B => 'B',
            Part::S => 'S',
            Part::T => 'T',
        }
    }
}

/// Whether the planted same-index matching connects A to A (`Yes`) or is
/// rerouted or absent (`No`). YES instances have a large maximum matching,
/// NO instances a provably small one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    Yes,
    No,
}

/// `Fixed` is the full construction with B-B noise edges and asymmetric A/B
/// sizes so that degrees carry no information. `Broken` drops the B-B noise
/// and keeps |A| = |B|; its degree asymmetry between the truths is
/// intentional and is what the random-walk distinguisher exploits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Fixed,
    Broken,
}

/// Generation parameters for the layered instance family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InstanceParams {
    /// Scale parameter: part sizes are multiples of this.
    pub n_param: usize,
    pub epsilon: f64,
    pub d: usize,
    pub truth: Truth,
    pub variant: Variant,
    pub seed: u64,
}

/// A generated instance: graph, ground-truth per-vertex labels, and the
/// parameters it was built from. Estimators never read the A/B labels; they
/// exist for experiments and verification only (S and T labels are public).
#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub graph: Graph,
    pub labels: Vec<(Part, Side)>,
    pub params: InstanceParams,
}

impl LowerBoundInstance {
    pub fn truth(&self) -> Truth {
        self.params.truth
    }

    /// Size of one side's A part.
    pub fn a_size(&self) -> usize {
        match self.params.variant {
            Variant::Fixed => self.params.n_param - self.eps_n(),
            Variant::Broken => self.params.n_param,
        }
    }

    pub fn eps_n(&self) -> usize {
        (self.params.epsilon * self.params.n_param as f64).round() as usize
    }

    /// Vertices of parts B and T on both sides; a vertex cover on NO
    /// instances.
    pub fn b_t_vertices(&self) -> Vec<u32> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, (p, _))| matches!(p, Part::B | Part::T))
            .map(|(v, _)| v as u32)
            .collect()
    }

    /// Serializes labels as `vertex label side` lines.
    pub fn labels_to_string(&self) -> String {
        let mut out = String::new();
        for (v, (p, s)) in self.labels.iter().enumerate() {
            let side = if *s == Side::V { 'V' } else { 'U' };
            let _ = writeln!(out, "{v} {} {side}", p.letter());
        }
        out
    }
}

/// Parses a labels file written by [`LowerBoundInstance::labels_to_string`].
pub fn parse_labels(text: &str) -> Result<Vec<(Part, Side)>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(v), Some(p), Some(s)) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("malformed label line {}", idx + 1)));
        };
        let v: usize = v
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex on label line {}", idx + 1)))?;
        let part = match p {
            "A" => Part::A,
            "B" => Part::B,
            "S" => Part::S,
            "T" => Part::T,
            _ => return Err(Error::Parse(format!("bad part on label line {}", idx + 1))),
        };
        let side = match s {
            "V" => Side::V,
            "U" => Side::U,
            _ => return Err(Error::Parse(format!("bad side on label line {}", idx + 1))),
        };
        rows.push((v, (part, side)));
    }
    rows.sort_by_key(|&(v, _)| v);
    for (i, &(v, _)) in rows.iter().enumerate() {
        if v != i {
            return Err(Error::Parse(format!("label file misses vertex {i}")));
        }
    }
    Ok(rows.into_iter().map(|(_, l)| l).collect())
}

/// Generates a layered YES/NO instance.
///
/// Fixed variant, with N the scale parameter: parts per side are A of size
/// (1-eps)N, B and S of size N, T of size eps*N. T is complete to the
/// opposite side's A, B and S; there are B-S perfect matchings between the
/// sides; an (eps*d - 1)-regular B-B graph avoiding same-index pairs;
/// near-regular A-B graphs with degree d on the A side and (1-eps)d on the B
/// side avoiding same-index pairs; same-index B-B edges on the top eps*N
/// indices; and a truth-dependent same-index perfect matching (YES: A-A and
/// B-B; NO: A-B both ways). Broken variant: |A| = |B| = |S| = N,
/// Erdos-Renyi A-B graphs of expected degree d, no B-B edges at all, YES
/// adds the A-A matching and NO adds nothing.
pub fn gen_lower_bound(params: InstanceParams) -> Result<LowerBoundInstance> {
    let InstanceParams {
        n_param: n_p,
        epsilon,
        d,
        truth,
        variant,
        seed,
    } = params;
    if n_p == 0 || d == 0 {
        return Err(Error::Generation("N and d must be positive".into()));
    }
    let eps_n_f = epsilon * n_p as f64;
    let eps_d_f = epsilon * d as f64;
    let a_n_f = (1.0 - epsilon) * n_p as f64;
    let near = |x: f64| (x - x.round()).abs() < 1e-9;
    if !(near(eps_n_f) && near(eps_d_f) && near(a_n_f)) {
        return Err(Error::Generation(format!(
            "eps*N={eps_n_f}, eps*d={eps_d_f}, (1-eps)*N={a_n_f} must all be integers"
        )));
    }
    let eps_n = eps_n_f.round() as usize;
    let eps_d = eps_d_f.round() as usize;
    if eps_d < 1 {
        return Err(Error::Generation("eps*d must be at least 1".into()));
    }
    if d > eps_n {
        return Err(Error::Generation(format!(
            "d={d} must not exceed eps*N={eps_n}"
        )));
    }

    let a_size = match variant {
        Variant::Fixed => n_p - eps_n,
        Variant::Broken => n_p,
    };
    let (b_size, s_size, t_size) = (n_p, n_p, eps_n);
    let side_total = a_size + b_size + s_size + t_size;
    let n = 2 * side_total;

    // Physical block bases: side V then side U; A, B, S, T within a side.
    let base = |sd: Side, part: Part| -> usize {
        let off = if sd == Side::V { 0 } else { side_total };
        off + match part {
            Part::A => 0,
            Part::B => a_size,
            Part::S => a_size + b_size,
            Part::T => a_size + b_size + s_size,
        }
    };
    let part_size = |part: Part| match part {
        Part::A => a_size,
        Part::B => b_size,
        Part::S => s_size,
        Part::T => t_size,
    };

    // Per-part index permutations: vertex(part, side, i) is the i-th vertex
    // of the part under a seeded shuffle of its block.
    let mut perms: Vec<Vec<u32>> = Vec::with_capacity(8);
    let part_code = |sd: Side, part: Part| -> usize {
        (if sd == Side::U { 4 } else { 0 })
            + match part {
                Part::A => 0,
                Part::B => 1,
                Part::S => 2,
                Part::T => 3,
            }
    };
    for sd in [Side::V, Side::U] {
        for part in [Part::A, Part::B, Part::S, Part::T] {
            let sz = part_size(part);
            let mut perm: Vec<u32> = (0..sz as u32).collect();
            let mut rng =
                ChaCha8Rng::seed_from_u64(hash64(seed, TAG_PERM, part_code(sd, part) as u64));
            for i in (1..sz).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            perms.push(perm);
        }
    }
    let vx = |sd: Side, part: Part, i: usize| -> u32 {
        (base(sd, part) + perms[part_code(sd, part)][i] as usize) as u32
    };

    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    fn push(adj: &mut [Vec<u32>], u: u32, v: u32) {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }

    // T vertices are complete to the opposite side's A, B and S blocks.
    for (t_side, other) in [(Side::V, Side::U), (Side::U, Side::V)] {
        let t_base = base(t_side, Part::T);
        let o_from = base(other, Part::A);
        let o_to = base(other, Part::S) + s_size;
        for t in t_base..t_base + t_size {
            for o in o_from..o_to {
                push(&mut adj, t as u32, o as u32);
            }
        }
    }

    // B-S perfect matchings: B_U[i] - S_V[i] and B_V[i] - S_U[i].
    for i in 0..n_p {
        push(&mut adj, vx(Side::U, Part::B, i), vx(Side::V, Part::S, i));
        push(&mut adj, vx(Side::V, Part::B, i), vx(Side::U, Part::S, i));
    }

    match variant {
        Variant::Fixed => {
            // (eps*d - 1)-regular B-B graph avoiding same-index pairs;
            // empty when eps*d = 1.
            if eps_d > 1 {
                let deg = eps_d - 1;
                let forbidden: Vec<(usize, usize)> = (0..n_p).map(|i| (i, i)).collect();
                let edges = sample_near_regular_bipartite(
                    &vec![deg; n_p],
                    &vec![deg; n_p],
                    &forbidden,
                    hash64(seed, TAG_REG, 101),
                )?;
                for (i, j) in edges {
                    push(&mut adj, vx(Side::V, Part::B, i), vx(Side::U, Part::B, j));
                }
            }
            // Near-regular A-B graphs avoiding same-index pairs.
            let forb_ab: Vec<(usize, usize)> = (0..a_size).map(|i| (i, i)).collect();
            let edges = sample_near_regular_bipartite(
                &vec![d; a_size],
                &vec![d - eps_d; n_p],
                &forb_ab,
                hash64(seed, TAG_REG, 102),
            )?;
            for (i, j) in edges {
                push(&mut adj, vx(Side::V, Part::A, i), vx(Side::U, Part::B, j));
            }
            let edges = sample_near_regular_bipartite(
                &vec![d - eps_d; n_p],
                &vec![d; a_size],
                &forb_ab.iter().map(|&(i, j)| (j, i)).collect::<Vec<_>>(),
                hash64(seed, TAG_REG, 103),
            )?;
            for (i, j) in edges {
                push(&mut adj, vx(Side::V, Part::B, i), vx(Side::U, Part::A, j));
            }
            // Same-index B-B edges on the top eps*N indices.
            for i in a_size..n_p {
                push(&mut adj, vx(Side::V, Part::B, i), vx(Side::U, Part::B, i));
            }
            // Truth-specific same-index perfect matching on the first
            // (1-eps)N indices.
            match truth {
                Truth::Yes => {
                    for i in 0..a_size {
                        push(&mut adj, vx(Side::V, Part::A, i), vx(Side::U, Part::A, i));
                        push(&mut adj, vx(Side::V, Part::B, i), vx(Side::U, Part::B, i));
                    }
                }
                Truth::No => {
                    for i in 0..a_size {
                        push(&mut adj, vx(Side::V, Part::A, i), vx(Side::U, Part::B, i));
                        push(&mut adj, vx(Side::V, Part::B, i), vx(Side::U, Part::A, i));
                    }
                }
            }
        }
        Variant::Broken => {
            // Erdos-Renyi A-B graphs with expected degree d; degrees are
            // deliberately left unequalized between the truths.
            let p = d as f64 / n_p as f64;
            for (salt, ls, lp, rs, rp) in [
                (104u64, Side::V, Part::A, Side::U, Part::B),
                (105u64, Side::V, Part::B, Side::U, Part::A),
            ] {
                let mut rng = ChaCha8Rng::seed_from_u64(hash64(seed, TAG_ER, salt));
                for i in 0..part_size(lp) {
                    for j in 0..part_size(rp) {
                        if rng.random_bool(p) {
                            push(&mut adj, vx(ls, lp, i), vx(rs, rp, j));
                        }
                    }
                }
            }
            if truth == Truth::Yes {
                for i in 0..n_p {
                    push(&mut adj, vx(Side::V, Part::A, i), vx(Side::U, Part::A, i));
                }
            }
        }
    }

    // Uniformly shuffle each adjacency list.
    for (v, list) in adj.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(hash64(seed, TAG_SHUF, v as u64));
        for i in (1..list.len()).rev() {
            let j = rng.random_range(0..=i);
            list.swap(i, j);
        }
    }

    let mut sides = vec![Side::V; n];
    for s in sides.iter_mut().skip(side_total) {
        *s = Side::U;
    }
    let graph = Graph::from_adjacency(adj)?.with_bipartition(sides)?;

    let mut labels = vec![(Part::A, Side::V); n];
    for sd in [Side::V, Side::U] {
        for part in [Part::A, Part::B, Part::S, Part::T] {
            let b = base(sd, part);
            for label in labels.iter_mut().skip(b).take(part_size(part)) {
                *label = (part, sd);
            }
        }
    }

    Ok(LowerBoundInstance {
        graph,
        labels,
        params,
    })
}

/// Samples a simple bipartite graph hitting the exact degree targets while
/// avoiding `forbidden` pairs. Stub matching (configuration model) followed
/// by random edge-swap repair of parallel edges and forbidden hits; the
/// repair loop is bounded by `10 * |E|` swap attempts, after which the whole
/// pairing restarts (at most 100 restarts).
///
/// The sample is close to, but not exactly, uniform over all qualifying
/// graphs; the swap-repair bias is negligible for the experiments this
/// feeds.
pub fn sample_near_regular_bipartite(
    left_degrees: &[usize],
    right_degrees: &[usize],
    forbidden: &[(usize, usize)],
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let sum_l: usize = left_degrees.iter().sum();
    let sum_r: usize = right_degrees.iter().sum();
    if sum_l != sum_r {
        return Err(Error::Generation(format!(
            "degree sums differ: left {sum_l} vs right {sum_r}"
        )));
    }
    if left_degrees.iter().copied().max().unwrap_or(0) > right_degrees.len()
        || right_degrees.iter().copied().max().unwrap_or(0) > left_degrees.len()
    {
        return Err(Error::Generation(
            "a degree target exceeds the opposite part size".into(),
        ));
    }
    let e = sum_l;
    if e == 0 {
        return Ok(Vec::new());
    }
    let forbidden: std::collections::HashSet<(u32, u32)> = forbidden
        .iter()
        .map(|&(i, j)| (i as u32, j as u32))
        .collect();

    let mut left_stubs: Vec<u32> = Vec::with_capacity(e);
    for (i, &deg) in left_degrees.iter().enumerate() {
        left_stubs.extend(std::iter::repeat_n(i as u32, deg));
    }
    let right_stubs: Vec<u32> = {
        let mut s = Vec::with_capacity(e);
        for (j, &deg) in right_degrees.iter().enumerate() {
            s.extend(std::iter::repeat_n(j as u32, deg));
        }
        s
    };
    // Shuffling one stub side is enough for a uniform pairing.
    let _ = &mut left_stubs;

    for restart in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(hash64(seed, TAG_REG, restart));
        let mut rs = right_stubs.clone();
        for i in (1..rs.len()).rev() {
            let j = rng.random_range(0..=i);
            rs.swap(i, j);
        }
        let mut pairs: Vec<(u32, u32)> = left_stubs
            .iter()
            .zip(rs.iter())
            .map(|(&a, &b)| (a, b))
            .collect();

        let mut counts: std::collections::HashMap<(u32, u32), u32> =
            std::collections::HashMap::with_capacity(e * 2);
        for &p in &pairs {
            *counts.entry(p).or_insert(0) += 1;
        }
        let is_bad = |p: (u32, u32), counts: &std::collections::HashMap<(u32, u32), u32>| {
            forbidden.contains(&p) || counts.get(&p).copied().unwrap_or(0) > 1
        };

        let mut work: Vec<usize> = (0..e).filter(|&k| is_bad(pairs[k], &counts)).collect();
        let mut swaps = 0usize;
        let budget = 10 * e;
        let mut converged = true;
        'repair: while let Some(&k) = work.last() {
            if !is_bad(pairs[k], &counts) {
                work.pop();
                continue;
            }
            loop {
                if swaps >= budget {
                    converged = false;
                    break 'repair;
                }
                swaps += 1;
                let j = rng.random_range(0..e);
                if j == k {
                    continue;
                }
                let (lk, rk) = pairs[k];
                let (lj, rj) = pairs[j];
                let n1 = (lk, rj);
                let n2 = (lj, rk);
                // Both rewired edges must come out clean: unforbidden and
                // previously absent. Then no new defect is ever created and
                // the worklist only shrinks.
                if n1 == n2
                    || forbidden.contains(&n1)
                    || forbidden.contains(&n2)
                    || counts.contains_key(&n1)
                    || counts.contains_key(&n2)
                {
                    continue;
                }
                for old in [(lk, rk), (lj, rj)] {
                    if let Some(c) = counts.get_mut(&old) {
                        *c -= 1;
                        if *c == 0 {
                            counts.remove(&old);
                        }
                    }
                }
                *counts.entry(n1).or_insert(0) += 1;
                *counts.entry(n2).or_insert(0) += 1;
                pairs[k] = n1;
                pairs[j] = n2;
                break;
            }
        }
        if converged {
            return Ok(pairs
                .into_iter()
                .map(|(a, b)| (a as usize, b as usize))
                .collect());
        }
    }
    Err(Error::Generation(
        "edge-swap repair did not converge after 100 restarts".into(),
    ))
}

/// Erdos-Renyi style bipartite sample: each left-right pair is an edge
/// independently with probability `edge_prob`. Left vertices come first.
pub fn gen_random_bipartite(
    n_left: usize,
    n_right: usize,
    edge_prob: f64,
    seed: u64,
) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Generation(format!("bad edge_prob {edge_prob}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hash64(seed, TAG_ER, 0));
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n_left + n_right];
    for u in 0..n_left {
        for v in 0..n_right {
            if rng.random_bool(edge_prob) {
                let w = (n_left + v) as u32;
                adj[u].push(w);
                adj[w as usize].push(u as u32);
            }
        }
    }
    let mut sides = vec![Side::V; n_left + n_right];
    for s in sides.iter_mut().skip(n_left) {
        *s = Side::U;
    }
    Graph::from_adjacency(adj)?.with_bipartition(sides)
}

/// Uniform simple graph with exactly `m` edges.
pub fn gen_gnm(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let max = n.saturating_mul(n.saturating_sub(1)) / 2;
    if m > max {
        return Err(Error::Generation(format!(
            "m={m} exceeds the {max} possible edges on n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hash64(seed, TAG_ER, 1));
    let mut seen = std::collections::HashSet::with_capacity(m * 2);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.random_range(0..n as u32);
        let v = rng.random_range(0..n as u32);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Graph::from_edges(n, &edges)
}

/// A graph of `pairs` disjoint edges (a perfect matching), bipartite with
/// alternating sides.
pub fn gen_perfect_matching(pairs: usize) -> Result<Graph> {
    let mut edges = Vec::with_capacity(pairs);
    let mut sides = Vec::with_capacity(2 * pairs);
    for i in 0..pairs as u32 {
        edges.push((2 * i, 2 * i + 1));
        sides.push(Side::V);
        sides.push(Side::U);
    }
    Graph::from_edges(2 * pairs, &edges)?.with_bipartition(sides)
}

/// Returns a copy of `g` with every adjacency list independently and
/// uniformly reshuffled.
pub fn shuffle_adjacency(g: &Graph, seed: u64) -> Graph {
    g.shuffled_adjacency(seed)
}
