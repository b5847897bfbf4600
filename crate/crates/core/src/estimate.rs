//! Top-level matching-size estimators.
//!
//! `estimate_two_thirds` builds the bounded-edge-degree subgraph from
//! sampled edges, then estimates the matched-vertex fraction of the derived
//! subgraph G' through the local matching oracle. `estimate_beyond_two_thirds`
//! (bipartite only) additionally probes the low/mid-degree subgraph for an
//! augmenting matching among its unmatched mid vertices, using bucketed
//! greedy maximal matchings, a virtual-dummy random-greedy oracle, and a
//! vertex-removal loop.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edcs::{build_edcs, EdcsParams, EdcsState};
use crate::error::{Error, Result};
use crate::exact::greedy_maximal_matching;
use crate::graph::{OracleSession, QueryModel};
use crate::hash::hash64;
use crate::local::{
    deg_class, DegClass, LcaConfig, LcaRun, MidClass, RgmmNeighbor, RgmmSim, Selector,
};

const TAG_RGMM: u64 = 0x52_47_4D_4D;

/// Additive mode subtracts the n/(2*log2 n) correction; multiplicative mode
/// (list model only) counts edges exactly first and falls back to a direct
/// computation on sparse inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Additive,
    Multiplicative,
}

/// Configuration for the (almost) two-thirds estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TwoThirdsConfig {
    pub epsilon: f64,
    /// Vertex samples for the matched-fraction estimate.
    pub r: usize,
    pub edcs: EdcsParams,
    pub lca: LcaConfig,
    pub mode: EstimateMode,
    pub seed: u64,
}

impl TwoThirdsConfig {
    /// Formula-driven values: r = ceil(36 * log2(n)^3); multiplicative mode
    /// scales r by n^0.01.
    pub fn asymptotic(n: usize, epsilon: f64, seed: u64) -> Self {
        let l2 = (n.max(2) as f64).log2();
        TwoThirdsConfig {
            epsilon,
            r: (36.0 * l2 * l2 * l2).ceil() as usize,
            edcs: EdcsParams::asymptotic(n, epsilon),
            lca: LcaConfig::asymptotic(n, epsilon, hash64(seed, 0x4C43, 0)),
            mode: EstimateMode::Additive,
            seed,
        }
    }

    /// Desk-scale defaults: r = ceil(4 * log2(n)^2) samples, practical
    /// subgraph parameters, and a 3-phase local oracle (epsilon 1/3).
    pub fn practical(n: usize, epsilon: f64, seed: u64) -> Self {
        let l2 = (n.max(2) as f64).log2();
        TwoThirdsConfig {
            epsilon,
            r: ((4.0 * l2 * l2).ceil() as usize).max(16),
            edcs: EdcsParams::practical(n),
            lca: LcaConfig::practical(n, 1.0 / 3.0, hash64(seed, 0x4C43, 0)),
            mode: EstimateMode::Additive,
            seed,
        }
    }

    /// Sample count used when the multiplicative mode cannot bypass.
    fn multiplicative_r(&self, n: usize) -> usize {
        let l2 = (n.max(2) as f64).log2();
        ((self.r as f64) * (n.max(2) as f64).powf(0.01))
            .ceil()
            .max(4.0 * l2 * l2) as usize
    }
}

/// Configuration for the beyond-two-thirds bipartite estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BeyondConfig {
    pub epsilon: f64,
    pub gamma: f64,
    /// Outer iterations of the sample/remove loop.
    pub outer_iterations: usize,
    /// Combined case threshold: a case fires when its estimate reaches
    /// `case_threshold * mu1`.
    pub case_threshold: f64,
    /// Dummy neighbors attached to each unmatched mid B-vertex.
    pub kappa: usize,
    /// Pair samples per bucket.
    pub delta: usize,
    /// Bucket count per outer iteration.
    pub k_buckets: usize,
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub alg1: TwoThirdsConfig,
    pub mode: EstimateMode,
    pub seed: u64,
}

impl BeyondConfig {
    /// Formula-driven values: T = 200, threshold = c*alpha = 1e16 * 1e-10,
    /// kappa = ceil(48 n^(1-gamma) log2(n)^2), delta = ceil(n^(1+gamma)),
    /// k = ceil(n^(gamma/2)), r1 = ceil(72 log2(n)^3), r2 = ceil(288
    /// log2(n)^3), r3 = ceil(10 n^(1-gamma/2) log2(n)). The threshold makes
    /// cases 1-2 unreachable at desk scale; that is expected.
    pub fn asymptotic(n: usize, epsilon: f64, gamma: f64, seed: u64) -> Self {
        let nf = n.max(2) as f64;
        let l2 = nf.log2();
        BeyondConfig {
            epsilon,
            gamma,
            outer_iterations: 200,
            case_threshold: 1e16 * 1e-10,
            kappa: (48.0 * nf.powf(1.0 - gamma) * l2 * l2).ceil() as usize,
            delta: nf.powf(1.0 + gamma).ceil() as usize,
            k_buckets: nf.powf(gamma / 2.0).ceil() as usize,
            r1: (72.0 * l2 * l2 * l2).ceil() as usize,
            r2: (288.0 * l2 * l2 * l2).ceil() as usize,
            r3: (10.0 * nf.powf(1.0 - gamma / 2.0) * l2).ceil() as usize,
            alg1: TwoThirdsConfig::asymptotic(n, epsilon, hash64(seed, 0x4131, 0)),
            mode: EstimateMode::Additive,
            seed,
        }
    }

    /// Desk-scale defaults: T = 8, threshold = 0.05, smaller sample counts,
    /// same structural formulas for kappa, delta and k.
    pub fn practical(n: usize, epsilon: f64, gamma: f64, seed: u64) -> Self {
        let nf = n.max(2) as f64;
        let l2 = nf.log2();
        BeyondConfig {
            epsilon,
            gamma,
            outer_iterations: 8,
            case_threshold: 0.05,
            kappa: (48.0 * nf.powf(1.0 - gamma) * l2 * l2).ceil() as usize,
            delta: nf.powf(1.0 + gamma).ceil() as usize,
            k_buckets: nf.powf(gamma / 2.0).ceil() as usize,
            r1: ((4.0 * l2 * l2).ceil() as usize).max(16),
            r2: ((4.0 * l2 * l2).ceil() as usize).max(16),
            r3: (2.0 * nf.powf(1.0 - gamma / 2.0) * l2).ceil() as usize,
            alg1: TwoThirdsConfig::practical(n, epsilon, hash64(seed, 0x4131, 0)),
            mode: EstimateMode::Additive,
            seed,
        }
    }
}

/// Per-outer-iteration diagnostics of the beyond estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationDiag {
    pub iteration: usize,
    pub live_mid: usize,
    pub removed: usize,
    pub max_mu2: f64,
    pub max_mu3: f64,
    /// Vertices removed from the live mid set this iteration, ascending.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub removed_vertices: Vec<u32>,
}

/// Diagnostics shared by both estimators.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edcs_moves: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edcs_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_edge_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_tilde_alg1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub iterations: Vec<IterationDiag>,
}

/// The estimator's output: the estimate, which return path produced it, the
/// full parameter snapshot, and exact query totals. Serializes to a single
/// JSON object with stable field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub algorithm: String,
    pub estimate: f64,
    pub mode: EstimateMode,
    /// One of "alg1", "direct", "case1", "case2", "fallback".
    pub branch: String,
    pub n: usize,
    pub model: QueryModel,
    pub seed: u64,
    pub queries_list: u64,
    pub queries_pair: u64,
    pub params: serde_json::Value,
    pub diagnostics: Diagnostics,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn additive_correction(n: usize) -> f64 {
    if n >= 2 {
        n as f64 / (2.0 * (n as f64).log2())
    } else {
        0.0
    }
}

/// Shared core: build H, then sample `r` vertices and count how many are
/// matched in the fixed matching of the selected derived subgraph.
fn sample_matched_fraction(sess: &mut OracleSession, run: &mut LcaRun, r: usize) -> Result<usize> {
    let mut x = 0usize;
    for _ in 0..r {
        let v = sess.sample_vertex();
        if run.lca_matched(sess, v)? {
            x += 1;
        }
    }
    Ok(x)
}

struct Alg1Outcome {
    state: EdcsState,
    mu_tilde: f64,
    branch: &'static str,
    diags: Diagnostics,
}

fn run_alg1(
    sess: &mut OracleSession,
    config: &TwoThirdsConfig,
    model: QueryModel,
) -> Result<Alg1Outcome> {
    let n = sess.n();
    let mut diags = Diagnostics::default();

    if config.mode == EstimateMode::Multiplicative {
        if model != QueryModel::List {
            return Err(Error::Usage(
                "multiplicative mode requires the adjacency-list model".into(),
            ));
        }
        // Exact edge count via degree sums.
        let mut total = 0usize;
        for v in 0..n as u32 {
            total += sess.degree(v)?;
        }
        let m = total / 2;
        diags.exact_edge_count = Some(m);
        if (m as f64) <= (n.max(1) as f64).powf(1.99) {
            // Sparse enough: read the whole edge list and match exactly.
            let mut edges = Vec::with_capacity(m);
            for v in 0..n as u32 {
                let deg = sess.graph().degree_of(v);
                for i in 1..=deg {
                    let u = sess
                        .adj_list_query(v, i)?
                        .ok_or_else(|| Error::Internal("degree/list mismatch".into()))?;
                    if v < u {
                        edges.push((v, u));
                    }
                }
            }
            let g = crate::graph::Graph::from_edges(n, &edges)?;
            let mu = crate::exact::hopcroft_karp(&g).size();
            let state = EdcsState::new(n, config.edcs)?;
            return Ok(Alg1Outcome {
                state,
                mu_tilde: mu as f64,
                branch: "direct",
                diags,
            });
        }
    }

    let state = build_edcs(sess, config.edcs, model)?;
    diags.h_edges = Some(state.h_edge_count());
    diags.edcs_moves = Some(state.moves());
    diags.edcs_epochs = Some(state.epochs_run());

    let r = match config.mode {
        EstimateMode::Additive => config.r,
        EstimateMode::Multiplicative => config.multiplicative_r(n),
    }
    .max(1);
    let mut run = LcaRun::new(&state, config.lca, Selector::GPrime, model);
    let x = sample_matched_fraction(sess, &mut run, r)?;
    diags.matched_samples = Some(x);
    diags.sample_count = Some(r);
    drop(run);

    let raw = n as f64 * x as f64 / (2.0 * r as f64);
    let mu_tilde = match config.mode {
        EstimateMode::Additive => (raw - additive_correction(n)).max(0.0),
        // One-sided multiplicative correction in place of the additive term.
        EstimateMode::Multiplicative => {
            let shrink = 1.0 - 1.0 / (n.max(4) as f64).log2();
            (raw * shrink).max(0.0)
        }
    };
    Ok(Alg1Outcome {
        state,
        mu_tilde,
        branch: "alg1",
        diags,
    })
}

/// The (almost) two-thirds estimator.
pub fn estimate_two_thirds(
    sess: &mut OracleSession,
    config: &TwoThirdsConfig,
    model: QueryModel,
) -> Result<EstimateReport> {
    let n = sess.n();
    let outcome = run_alg1(sess, config, model)?;
    let (ql, qp) = sess.query_counts();
    Ok(EstimateReport {
        algorithm: "two-thirds".into(),
        estimate: outcome.mu_tilde,
        mode: config.mode,
        branch: outcome.branch.into(),
        n,
        model,
        seed: sess.seed(),
        queries_list: ql,
        queries_pair: qp,
        params: serde_json::to_value(config).expect("serializable"),
        diagnostics: outcome.diags,
    })
}

/// Estimate of the matching size of the low/mid derived subgraph: the same
/// sampling estimator as the two-thirds algorithm, but against the `MidLow`
/// selector. Clamped at zero.
pub fn estimate_mu1(
    sess: &mut OracleSession,
    state: &EdcsState,
    config: &TwoThirdsConfig,
    model: QueryModel,
) -> Result<f64> {
    let mut run = LcaRun::new(state, config.lca, Selector::MidLow, model);
    mu1_with_run(sess, &mut run, config.r.max(1))
}

fn mu1_with_run(sess: &mut OracleSession, run: &mut LcaRun, r: usize) -> Result<f64> {
    let n = sess.n();
    let x = sample_matched_fraction(sess, run, r)?;
    Ok((n as f64 * x as f64 / (2.0 * r as f64) - additive_correction(n)).max(0.0))
}

/// Adjacency cache shared across the beyond estimator's phases: G-neighbor
/// lists, neighbor sets, and exact degrees, each charged once per vertex.
struct AdjCache {
    model: QueryModel,
    lists: HashMap<u32, Rc<Vec<u32>>>,
    sets: HashMap<u32, Rc<HashSet<u32>>>,
    degrees: HashMap<u32, usize>,
}

impl AdjCache {
    fn new(model: QueryModel) -> Self {
        AdjCache {
            model,
            lists: HashMap::new(),
            sets: HashMap::new(),
            degrees: HashMap::new(),
        }
    }

    fn neighbors(&mut self, sess: &mut OracleSession, v: u32) -> Result<Rc<Vec<u32>>> {
        if let Some(l) = self.lists.get(&v) {
            return Ok(Rc::clone(l));
        }
        let mut list = Vec::new();
        match self.model {
            QueryModel::Matrix => {
                for u in 0..sess.n() as u32 {
                    if u != v && sess.pair_query(v, u)? {
                        list.push(u);
                    }
                }
            }
            QueryModel::List => {
                let deg = self.degree(sess, v)?;
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
        self.lists.insert(v, Rc::clone(&rc));
        Ok(rc)
    }

    fn neighbor_set(&mut self, sess: &mut OracleSession, v: u32) -> Result<Rc<HashSet<u32>>> {
        if let Some(s) = self.sets.get(&v) {
            return Ok(Rc::clone(s));
        }
        let list = self.neighbors(sess, v)?;
        let rc = Rc::new(list.iter().copied().collect::<HashSet<u32>>());
        self.sets.insert(v, Rc::clone(&rc));
        Ok(rc)
    }

    fn degree(&mut self, sess: &mut OracleSession, v: u32) -> Result<usize> {
        if let Some(&d) = self.degrees.get(&v) {
            return Ok(d);
        }
        let d = sess.degree(v)?;
        self.degrees.insert(v, d);
        Ok(d)
    }

    /// Edge confirmation: one pair query in the matrix model; in the list
    /// model, membership against the cached adjacency of the lower-degree
    /// endpoint.
    fn confirm(&mut self, sess: &mut OracleSession, u: u32, v: u32) -> Result<bool> {
        match self.model {
            QueryModel::Matrix => sess.pair_query(u, v),
            QueryModel::List => {
                let du = self.degree(sess, u)?;
                let dv = self.degree(sess, v)?;
                let probe = if du <= dv { u } else { v };
                let other = if du <= dv { v } else { u };
                Ok(self.neighbor_set(sess, probe)?.contains(&other))
            }
        }
    }
}

/// The beyond-two-thirds estimator for bipartite graphs.
pub fn estimate_beyond_two_thirds(
    sess: &mut OracleSession,
    config: &BeyondConfig,
    model: QueryModel,
) -> Result<EstimateReport> {
    if sess.graph().bipartition().is_none() {
        return Err(Error::Usage("bipartition required".into()));
    }
    let n = sess.n();
    let finish =
        |sess: &OracleSession, estimate: f64, branch: &str, diags: Diagnostics| -> EstimateReport {
            let (ql, qp) = sess.query_counts();
            EstimateReport {
                algorithm: "beyond".into(),
                estimate,
                mode: config.mode,
                branch: branch.into(),
                n,
                model,
                seed: sess.seed(),
                queries_list: ql,
                queries_pair: qp,
                params: serde_json::to_value(config).expect("serializable"),
                diagnostics: diags,
            }
        };

    // Embedded two-thirds run (shares the session, so query accounting is
    // cumulative).
    let mut alg1_cfg = config.alg1;
    alg1_cfg.mode = config.mode;
    let alg1 = run_alg1(sess, &alg1_cfg, model)?;
    let mut diags = alg1.diags.clone();
    diags.mu_tilde_alg1 = Some(alg1.mu_tilde);
    if alg1.branch == "direct" {
        return Ok(finish(sess, alg1.mu_tilde, "direct", diags));
    }
    let (estimate, branch, diags) =
        beyond_core(sess, config, model, &alg1.state, alg1.mu_tilde, diags)?;
    Ok(finish(sess, estimate, branch, diags))
}

/// The sample/remove loop behind [`estimate_beyond_two_thirds`], factored so
/// tests can drive it with a handcrafted subgraph state and baseline.
#[doc(hidden)]
pub fn beyond_core(
    sess: &mut OracleSession,
    config: &BeyondConfig,
    model: QueryModel,
    state: &EdcsState,
    mu_tilde: f64,
    mut diags: Diagnostics,
) -> Result<(f64, &'static str, Diagnostics)> {
    let n = sess.n();
    let mut alg1_cfg = config.alg1;
    alg1_cfg.mode = config.mode;
    diags.mu_tilde_alg1 = Some(mu_tilde);

    let r_samples = match config.mode {
        EstimateMode::Additive => alg1_cfg.r,
        EstimateMode::Multiplicative => alg1_cfg.multiplicative_r(n),
    }
    .max(1);

    // mu1 against the original (unshrunk) mid set.
    let mid_lca_cfg = LcaConfig {
        seed: hash64(config.seed, 0x4D4C, 0),
        ..alg1_cfg.lca
    };
    let mut run0 = LcaRun::new(state, mid_lca_cfg, Selector::MidLow, model);
    let mu1 = mu1_with_run(sess, &mut run0, r_samples)?;
    drop(run0);
    diags.mu1 = Some(mu1);

    // Neighbor-count threshold for case-3 removals; mu1 = 0 disables
    // removals (eta = n cannot be reached by a matching-degree count).
    let eta = if mu1 > 0.0 {
        (n as f64 * (n.max(2) as f64).log2() / (100.0 * mu1)).ceil()
    } else {
        n as f64
    };
    diags.eta = Some(eta);

    let mut live_mid: Vec<u32> = (0..n as u32)
        .filter(|&v| deg_class(state, v) == DegClass::Mid)
        .collect();
    let mut removed_acc: Vec<u32> = Vec::new();
    let mut cache = AdjCache::new(model);

    let threshold = |x: f64| x >= config.case_threshold * mu1 && x > 0.0;

    for iteration in 1..=config.outer_iterations {
        let mut iter_diag = IterationDiag {
            iteration,
            live_mid: live_mid.len(),
            removed: 0,
            max_mu2: 0.0,
            max_mu3: 0.0,
            removed_vertices: Vec::new(),
        };
        if live_mid.len() < 2 {
            diags.iterations.push(iter_diag);
            continue;
        }
        let mut run =
            LcaRun::new(state, mid_lca_cfg, Selector::MidLow, model).with_removed_mid(&removed_acc);

        // Sample k*delta ordered pairs of live mid vertices, in buckets.
        let mut matchings: Vec<crate::exact::MatchingView> = Vec::with_capacity(config.k_buckets);
        for _ in 0..config.k_buckets {
            let mut confirmed: Vec<(u32, u32)> = Vec::new();
            for _ in 0..config.delta {
                let iu = sess.rng_mut().random_range(0..live_mid.len());
                let mut iv = sess.rng_mut().random_range(0..live_mid.len());
                while iv == iu {
                    iv = sess.rng_mut().random_range(0..live_mid.len());
                }
                let (u, v) = (live_mid[iu], live_mid[iv]);
                if cache.confirm(sess, u, v)? {
                    confirmed.push((u, v));
                }
            }
            matchings.push(greedy_maximal_matching(&confirmed, n));
        }

        let live_sorted = {
            let mut l = live_mid.clone();
            l.sort_unstable();
            l
        };
        let live_set: HashSet<u32> = live_sorted.iter().copied().collect();

        for (i, m_ab) in matchings.iter().enumerate() {
            // Case 1: estimate the number of bucket-matching edges with
            // both endpoints unmatched in the fixed low/mid matching.
            // Samples are uniform over n slots so the estimator is
            // n * X / r1; slots beyond the matching contribute zero.
            let edges = m_ab.edges();
            let mut x = 0usize;
            for _ in 0..config.r1 {
                let slot = sess.rng_mut().random_range(0..n);
                if slot < edges.len() {
                    let (a, b) = edges[slot];
                    if !run.lca_matched(sess, a)? && !run.lca_matched(sess, b)? {
                        x += 1;
                    }
                }
            }
            let mu2 =
                (n as f64 * x as f64 / config.r1.max(1) as f64 - additive_correction(n)).max(0.0);
            iter_diag.max_mu2 = iter_diag.max_mu2.max(mu2);
            if threshold(mu2) && mu1 + mu2 >= mu_tilde {
                diags.iterations.push(iter_diag);
                return Ok((mu1 + mu2, "case1", diags));
            }

            // Case 2: random-greedy maximal matching on the live mid
            // vertices outside this bucket's matching, with kappa dummy
            // neighbors attached to unmatched B-vertices. Samples are again
            // uniform over n slots, restricted to unmatched A-vertices.
            let in_bucket = m_ab.matched_flags();
            let mut sim = RgmmSim::new(
                hash64(
                    config.seed,
                    TAG_RGMM,
                    (iteration * config.k_buckets + i) as u64,
                ),
                n + 64,
            );
            let kappa = config.kappa as u32;
            let mut y = 0usize;
            let mut y_samples = 0usize;
            for _ in 0..config.r2 {
                y_samples += 1;
                let slot = sess.rng_mut().random_range(0..n);
                if slot >= live_sorted.len() {
                    continue;
                }
                let v = live_sorted[slot];
                if in_bucket[v as usize] {
                    continue;
                }
                if run.classify_mid(sess, v)? != MidClass::A {
                    continue;
                }
                // Membership of v in the random-greedy matching of the
                // virtual graph, materialized on demand.
                let run_ref = &mut run;
                let cache_ref = &mut cache;
                let sess_ref = &mut *sess;
                let live_ref = &live_set;
                let mut fetch = move |x: u32| -> Result<Vec<RgmmNeighbor>> {
                    let mut out: Vec<RgmmNeighbor> = Vec::new();
                    for &u in cache_ref.neighbors(sess_ref, x)?.iter() {
                        if live_ref.contains(&u) && !in_bucket[u as usize] {
                            out.push(RgmmNeighbor::Real(u));
                        }
                    }
                    if run_ref.classify_mid(sess_ref, x)? == MidClass::B {
                        out.extend((0..kappa).map(RgmmNeighbor::Dummy));
                    }
                    Ok(out)
                };
                if sim.vertex_matched(v, &mut fetch)? {
                    y += 1;
                }
            }
            let mu3 = (n as f64 * y as f64 / (2.0 * y_samples.max(1) as f64)
                - additive_correction(n))
            .max(0.0);
            iter_diag.max_mu3 = iter_diag.max_mu3.max(mu3);
            if threshold(mu3) && mu1 + mu3 >= mu_tilde {
                diags.iterations.push(iter_diag);
                return Ok((mu1 + mu3, "case2", diags));
            }
        }

        // Case 3: sample A-vertices by rejection; mid vertices adjacent (in
        // the union of bucket matchings) to at least eta of them get
        // removed from the live set.
        let a_estimate = (live_mid.len() as f64 - mu1).max(1.0);
        let per_sample_cap = (50.0 * n as f64 / a_estimate).ceil() as usize;
        let attempts_cap = config.r3.saturating_mul(per_sample_cap.max(1));
        let mut hits: HashMap<u32, usize> = HashMap::new();
        let mut collected = 0usize;
        let mut attempts = 0usize;
        while collected < config.r3 && attempts < attempts_cap {
            attempts += 1;
            let idx = sess.rng_mut().random_range(0..live_mid.len());
            let v = live_mid[idx];
            if run.classify_mid(sess, v)? != MidClass::A {
                continue;
            }
            collected += 1;
            for m_ab in &matchings {
                if m_ab.is_matched(v) {
                    let &(a, b) = m_ab
                        .edges()
                        .iter()
                        .find(|&&(a, b)| a == v || b == v)
                        .expect("matched vertex has an edge");
                    let partner = if a == v { b } else { a };
                    *hits.entry(partner).or_insert(0) += 1;
                }
            }
        }
        let mut to_remove: Vec<u32> = hits
            .into_iter()
            .filter(|&(_, c)| (c as f64) >= eta)
            .map(|(v, _)| v)
            .collect();
        to_remove.sort_unstable();
        iter_diag.removed = to_remove.len();
        iter_diag.removed_vertices = to_remove.clone();
        if !to_remove.is_empty() {
            let rm: HashSet<u32> = to_remove.iter().copied().collect();
            live_mid.retain(|v| !rm.contains(v));
            removed_acc.extend(to_remove);
        }
        diags.iterations.push(iter_diag);
    }

    Ok((mu_tilde, "fallback", diags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::instances::{gen_gnm, gen_perfect_matching, gen_random_bipartite};

    #[test]
    fn empty_graph_estimates_zero() {
        let g = Graph::from_edges(10, &[]).unwrap();
        let mut sess = OracleSession::new(&g, 1);
        let cfg = TwoThirdsConfig::practical(10, 0.1, 1);
        let rep = estimate_two_thirds(&mut sess, &cfg, QueryModel::Matrix).unwrap();
        assert_eq!(rep.estimate, 0.0);
        assert_eq!(rep.branch, "alg1");
        assert!(rep.queries_pair > 0);
    }

    #[test]
    fn perfect_matching_estimate_in_window() {
        let g = gen_perfect_matching(200).unwrap();
        let n = 400usize;
        let cfg = TwoThirdsConfig::practical(n, 0.1, 7);
        let mut sess = OracleSession::new(&g, 7);
        let rep = estimate_two_thirds(&mut sess, &cfg, QueryModel::Matrix).unwrap();
        let mu = 200.0;
        let lo = (2.0 / 3.0 - 0.05) * mu - n as f64 / (n as f64).log2();
        assert!(rep.estimate >= lo, "{} < {lo}", rep.estimate);
        assert!(rep.estimate <= mu, "{} > {mu}", rep.estimate);
    }

    #[test]
    fn gnm_estimate_sandwich() {
        let n = 300;
        let g = gen_gnm(n, 1200, 3).unwrap();
        let mu = crate::exact::hopcroft_karp(&g).size() as f64;
        let cfg = TwoThirdsConfig::practical(n, 0.1, 5);
        let mut sess = OracleSession::new(&g, 5);
        let rep = estimate_two_thirds(&mut sess, &cfg, QueryModel::List).unwrap();
        let lo = (2.0 / 3.0 - 0.05) * mu - n as f64 / (n as f64).log2();
        assert!(rep.estimate >= lo, "{} < {lo}", rep.estimate);
        assert!(rep.estimate <= mu, "{} > {mu}", rep.estimate);
    }

    #[test]
    fn multiplicative_mode_bypasses_on_sparse() {
        let g = gen_gnm(100, 300, 2).unwrap();
        let mu = crate::exact::hopcroft_karp(&g).size() as f64;
        let mut cfg = TwoThirdsConfig::practical(100, 0.1, 3);
        cfg.mode = EstimateMode::Multiplicative;
        let mut sess = OracleSession::new(&g, 3);
        let rep = estimate_two_thirds(&mut sess, &cfg, QueryModel::List).unwrap();
        assert_eq!(rep.branch, "direct");
        assert_eq!(rep.estimate, mu);
        // Multiplicative mode needs the list model.
        let mut sess = OracleSession::new(&g, 3);
        assert!(estimate_two_thirds(&mut sess, &cfg, QueryModel::Matrix).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let g = gen_gnm(120, 360, 9).unwrap();
        let cfg = TwoThirdsConfig::practical(120, 0.1, 11);
        let mut s1 = OracleSession::new(&g, 11);
        let mut s2 = OracleSession::new(&g, 11);
        let a = estimate_two_thirds(&mut s1, &cfg, QueryModel::Matrix).unwrap();
        let b = estimate_two_thirds(&mut s2, &cfg, QueryModel::Matrix).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn beyond_requires_bipartition() {
        let g = gen_gnm(50, 100, 1).unwrap();
        let cfg = BeyondConfig::practical(50, 0.1, 0.5, 2);
        let mut sess = OracleSession::new(&g, 2);
        let err = estimate_beyond_two_thirds(&mut sess, &cfg, QueryModel::Matrix).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn beyond_empty_graph_falls_back() {
        let g = gen_random_bipartite(10, 10, 0.0, 1).unwrap();
        let cfg = BeyondConfig::practical(20, 0.1, 0.5, 2);
        let mut sess = OracleSession::new(&g, 2);
        let rep = estimate_beyond_two_thirds(&mut sess, &cfg, QueryModel::Matrix).unwrap();
        assert_eq!(rep.estimate, 0.0);
        assert_eq!(rep.branch, "fallback");
    }

    #[test]
    fn beyond_sandwich_and_dominates_alg1() {
        let g = gen_random_bipartite(150, 150, 0.04, 5).unwrap();
        let n = 300usize;
        let mu = crate::exact::hopcroft_karp(&g).size() as f64;
        let mut cfg = BeyondConfig::practical(n, 0.1, 0.5, 6);
        cfg.outer_iterations = 3;
        let mut sess = OracleSession::new(&g, 6);
        let rep = estimate_beyond_two_thirds(&mut sess, &cfg, QueryModel::Matrix).unwrap();
        let lo = (2.0 / 3.0 - 0.05) * mu - n as f64 / (n as f64).log2();
        assert!(rep.estimate >= lo.max(0.0), "{} < {lo}", rep.estimate);
        assert!(rep.estimate <= mu, "{} > {mu}", rep.estimate);
        if rep.branch != "fallback" {
            let alg1 = rep.diagnostics.mu_tilde_alg1.unwrap();
            assert!(rep.estimate >= alg1);
        }
        // Query accounting is monotone: total at least the embedded run's.
        assert!(rep.queries_pair + rep.queries_list > 0);
    }

    #[test]
    fn beyond_is_deterministic() {
        let g = gen_random_bipartite(80, 80, 0.06, 4).unwrap();
        let mut cfg = BeyondConfig::practical(160, 0.1, 0.5, 9);
        cfg.outer_iterations = 2;
        let mut s1 = OracleSession::new(&g, 9);
        let mut s2 = OracleSession::new(&g, 9);
        let a = estimate_beyond_two_thirds(&mut s1, &cfg, QueryModel::Matrix).unwrap();
        let b = estimate_beyond_two_thirds(&mut s2, &cfg, QueryModel::Matrix).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
