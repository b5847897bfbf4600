//! The experiment harness: instance generation, exact solving, estimation,
//! query-scaling benchmarks, and the YES/NO distinguishability demo.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use matchest::estimate::{
    estimate_beyond_two_thirds, estimate_two_thirds, EstimateMode, EstimateReport,
};
use matchest::exact::{hopcroft_karp, hopcroft_karp_with_cover, verify_vertex_cover};
use matchest::graph::{load_graph, Graph, OracleSession, QueryModel};
use matchest::hash::{hash64, splitmix64};
use matchest::instances::{
    gen_gnm, gen_lower_bound, gen_perfect_matching, gen_random_bipartite, InstanceParams, Part,
    Truth, Variant,
};
use matchest::{Error, Result};

use crate::overrides::ParamOverrides;

const TAG_TRIAL: u64 = 0x54_52_49_41;

/// Writes `text` to `path`, creating parent directories.
fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match path {
        Some(p) => write_file(p, &text)?,
        None => println!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

/// Manifest written next to every generated lower-bound instance; the
/// instance is reproducible from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceManifest {
    pub kind: String,
    pub params: InstanceParams,
    pub n: usize,
    pub m: usize,
    pub graph_file: String,
    pub labels_file: String,
}

pub fn cmd_gen_lower_bound(
    params: InstanceParams,
    out_dir: &Path,
    name: &str,
) -> Result<serde_json::Value> {
    let inst = gen_lower_bound(params)?;
    std::fs::create_dir_all(out_dir)?;
    let graph_file = format!("{name}.adj");
    let labels_file = format!("{name}.labels");
    inst.graph.save_adjacency(out_dir.join(&graph_file))?;
    write_file(&out_dir.join(&labels_file), &inst.labels_to_string())?;
    let manifest = InstanceManifest {
        kind: "lower-bound".into(),
        params,
        n: inst.graph.n(),
        m: inst.graph.m(),
        graph_file,
        labels_file,
    };
    let value = serde_json::to_value(&manifest).expect("serializable");
    write_file(
        &out_dir.join(format!("{name}.manifest.json")),
        &serde_json::to_string_pretty(&value).expect("serializable"),
    )?;
    Ok(value)
}

pub fn cmd_gen_gnm(n: usize, m: usize, seed: u64, out: &Path) -> Result<serde_json::Value> {
    let g = gen_gnm(n, m, seed)?;
    save_by_extension(&g, out)?;
    Ok(json!({ "kind": "gnm", "n": n, "m": g.m(), "seed": seed, "graph_file": out }))
}

pub fn cmd_gen_bipartite(
    n_left: usize,
    n_right: usize,
    edge_prob: f64,
    seed: u64,
    out: &Path,
) -> Result<serde_json::Value> {
    let g = gen_random_bipartite(n_left, n_right, edge_prob, seed)?;
    save_by_extension(&g, out)?;
    Ok(json!({
        "kind": "bipartite", "n_left": n_left, "n_right": n_right,
        "edge_prob": edge_prob, "m": g.m(), "seed": seed, "graph_file": out
    }))
}

pub fn cmd_gen_perfect_matching(pairs: usize, out: &Path) -> Result<serde_json::Value> {
    let g = gen_perfect_matching(pairs)?;
    save_by_extension(&g, out)?;
    Ok(json!({ "kind": "perfect-matching", "pairs": pairs, "graph_file": out }))
}

fn save_by_extension(g: &Graph, out: &Path) -> Result<()> {
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    if out.extension().and_then(|e| e.to_str()) == Some("adj") {
        g.save_adjacency(out)
    } else {
        g.save_edge_list(out)
    }
}

// ---------------------------------------------------------------------------
// exact
// ---------------------------------------------------------------------------

pub fn cmd_exact(graph_path: &Path, out: Option<&Path>) -> Result<serde_json::Value> {
    let g = load_graph(graph_path)?;
    let value = if g.bipartition().is_some() {
        let (mv, cover) = hopcroft_karp_with_cover(&g)?;
        let verified = verify_vertex_cover(&g, &cover);
        json!({
            "n": g.n(), "m": g.m(), "mu": mv.size(),
            "cover_size": cover.len(), "cover_verified": verified
        })
    } else {
        let mv = hopcroft_karp(&g);
        json!({ "n": g.n(), "m": g.m(), "mu": mv.size() })
    };
    write_json(out, &value)?;
    Ok(value)
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    TwoThirds,
    Beyond,
}

pub fn cmd_estimate(
    graph_path: &Path,
    algorithm: Algorithm,
    model: QueryModel,
    mode: EstimateMode,
    seed: u64,
    overrides: &ParamOverrides,
    out: Option<&Path>,
) -> Result<EstimateReport> {
    let g = load_graph(graph_path)?;
    let report = run_estimator(&g, algorithm, model, mode, seed, overrides)?;
    let value = serde_json::to_value(&report).expect("serializable");
    write_json(out, &value)?;
    Ok(report)
}

pub fn run_estimator(
    g: &Graph,
    algorithm: Algorithm,
    model: QueryModel,
    mode: EstimateMode,
    seed: u64,
    overrides: &ParamOverrides,
) -> Result<EstimateReport> {
    let mut sess = OracleSession::new(g, seed);
    match algorithm {
        Algorithm::TwoThirds => {
            let cfg = overrides.two_thirds_config(g.n(), mode, seed);
            estimate_two_thirds(&mut sess, &cfg, model)
        }
        Algorithm::Beyond => {
            let cfg = overrides.beyond_config(g.n(), mode, seed);
            estimate_beyond_two_thirds(&mut sess, &cfg, model)
        }
    }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub trial: usize,
    pub queries_list: u64,
    pub queries_pair: u64,
    pub estimate: f64,
    pub mu_exact: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log(total queries) against log(n), one point
    /// per size using the median across trials.
    pub slope: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bench(
    sizes: &[usize],
    trials: usize,
    algorithm: Algorithm,
    model: QueryModel,
    edges_per_vertex: usize,
    seed: u64,
    overrides: &ParamOverrides,
    out_csv: Option<&Path>,
) -> Result<BenchSummary> {
    if sizes.is_empty() || trials == 0 {
        return Err(Error::Usage("need at least one size and one trial".into()));
    }
    let mut jobs = Vec::new();
    for &n in sizes {
        for trial in 0..trials {
            jobs.push((n, trial));
        }
    }
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(n, trial)| -> Result<BenchRow> {
            let trial_seed = hash64(seed, TAG_TRIAL, (n as u64) << 20 | trial as u64);
            let g = match algorithm {
                Algorithm::TwoThirds => gen_gnm(n, edges_per_vertex * n, trial_seed)?,
                Algorithm::Beyond => {
                    // Bipartite corpus with matching expected edge count.
                    let half = n / 2;
                    let p = (edges_per_vertex * n) as f64 / (half * half) as f64;
                    gen_random_bipartite(half, n - half, p.min(1.0), trial_seed)?
                }
            };
            let report = run_estimator(
                &g,
                algorithm,
                model,
                EstimateMode::Additive,
                splitmix64(trial_seed),
                overrides,
            )?;
            let mu_exact = hopcroft_karp(&g).size();
            Ok(BenchRow {
                n,
                trial,
                queries_list: report.queries_list,
                queries_pair: report.queries_pair,
                estimate: report.estimate,
                mu_exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("n,trial,queries_list,queries_pair,estimate,mu_exact\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.n, row.trial, row.queries_list, row.queries_pair, row.estimate, row.mu_exact
        );
    }
    if let Some(p) = out_csv {
        write_file(p, &csv)?;
    } else {
        print!("{csv}");
    }

    let mut points = Vec::new();
    for &n in sizes {
        let mut totals: Vec<u64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.queries_list + r.queries_pair)
            .collect();
        totals.sort_unstable();
        let median = totals[totals.len() / 2].max(1);
        points.push(((n as f64).ln(), (median as f64).ln()));
    }
    let slope = fit_slope(&points);
    Ok(BenchSummary { rows, slope })
}

/// Least-squares slope through (x, y) points.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// ---------------------------------------------------------------------------
// distinguish
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DistinguishSummary {
    pub variant: Variant,
    pub trials: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub n_param: usize,
    pub epsilon: f64,
    pub d: usize,
    pub walk_len: usize,
    pub walks_per_trial: usize,
    pub seed: u64,
}

/// The random-walk distinguisher: find a vertex of part A (no S-neighbors),
/// walk an even number of steps through A∪B neighbors by random list
/// queries, and classify the endpoint. A YES guess is issued iff some walk
/// ends outside A (an even-step parity violation). Part labels S and T are
/// public; A/B labels are never read.
#[allow(clippy::too_many_arguments)]
pub fn cmd_distinguish(
    variant: Variant,
    n_param: usize,
    epsilon: f64,
    d: usize,
    walk_len: usize,
    walks_per_trial: usize,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<DistinguishSummary> {
    if trials == 0 {
        return Err(Error::Usage("trials must be positive".into()));
    }
    // Validate parameters once up front so infeasibility fails fast.
    gen_lower_bound(InstanceParams {
        n_param,
        epsilon,
        d,
        truth: Truth::Yes,
        variant,
        seed,
    })
    .map(|_| ())?;

    let correct: usize = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<usize> {
            let trial_seed = hash64(seed, TAG_TRIAL, trial as u64);
            Ok(distinguish_trial(
                variant,
                n_param,
                epsilon,
                d,
                walk_len,
                walks_per_trial,
                trial_seed,
            )? as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let summary = DistinguishSummary {
        variant,
        trials,
        correct,
        accuracy: correct as f64 / trials as f64,
        n_param,
        epsilon,
        d,
        walk_len,
        walks_per_trial,
        seed,
    };
    write_json(out, &serde_json::to_value(&summary).expect("serializable"))?;
    Ok(summary)
}

fn distinguish_trial(
    variant: Variant,
    n_param: usize,
    epsilon: f64,
    d: usize,
    walk_len: usize,
    walks: usize,
    trial_seed: u64,
) -> Result<bool> {
    let truth = if splitmix64(hash64(trial_seed, 0xC0_1F, 0)) & 1 == 0 {
        Truth::Yes
    } else {
        Truth::No
    };
    let inst = gen_lower_bound(InstanceParams {
        n_param,
        epsilon,
        d,
        truth,
        variant,
        seed: hash64(trial_seed, 0x47_45_4E, 1),
    })?;
    let g = &inst.graph;
    let mut sess = OracleSession::new(g, hash64(trial_seed, 0x53_45_53, 2));

    // Public structure: which vertices are S, which are T. A/B membership is
    // what the walk tries to infer.
    let is_s: Vec<bool> = inst.labels.iter().map(|(p, _)| *p == Part::S).collect();
    let is_st: Vec<bool> = inst
        .labels
        .iter()
        .map(|(p, _)| matches!(p, Part::S | Part::T))
        .collect();
    let ab: Vec<u32> = (0..g.n() as u32).filter(|&v| !is_st[v as usize]).collect();

    let mut violation = false;
    'walks: for _ in 0..walks {
        // Locate a starting vertex in A by full-scan classification.
        let mut start = None;
        for _ in 0..64 {
            let v = ab[sess.rng_mut().random_range(0..ab.len())];
            if scan_has_no_s_neighbor(&mut sess, v, &is_s)? {
                start = Some(v);
                break;
            }
        }
        let Some(mut cur) = start else { continue };

        let mut completed = true;
        for _ in 0..walk_len {
            let deg = sess.degree(cur)?;
            if deg == 0 {
                completed = false;
                break;
            }
            // Redraw random list positions until an A∪B neighbor comes up.
            let cap = 64 + 8 * deg / (d + 1);
            let mut next = None;
            for _ in 0..cap {
                let i = sess.rng_mut().random_range(1..=deg);
                let u = sess
                    .adj_list_query(cur, i)?
                    .ok_or_else(|| Error::Internal("degree/list mismatch".into()))?;
                if !is_st[u as usize] {
                    next = Some(u);
                    break;
                }
            }
            match next {
                Some(u) => cur = u,
                None => {
                    completed = false;
                    break;
                }
            }
        }
        if completed && !scan_has_no_s_neighbor(&mut sess, cur, &is_s)? {
            // Even-length walk ended on a B vertex.
            violation = true;
            break 'walks;
        }
    }
    let guess = if violation { Truth::Yes } else { Truth::No };
    Ok(guess == truth)
}

/// Full adjacency scan: true iff no neighbor belongs to S. In this instance
/// family, A vertices have no S-neighbor and B vertices exactly one.
fn scan_has_no_s_neighbor(sess: &mut OracleSession, v: u32, is_s: &[bool]) -> Result<bool> {
    let mut i = 1;
    loop {
        match sess.adj_list_query(v, i)? {
            Some(u) => {
                if is_s[u as usize] {
                    return Ok(false);
                }
                i += 1;
            }
            None => return Ok(true),
        }
    }
}

// ---------------------------------------------------------------------------
// shared parsing helpers for main
// ---------------------------------------------------------------------------

pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("bad size {t:?}")))
        })
        .collect()
}

pub fn out_path(out: &Option<PathBuf>) -> Option<&Path> {
    out.as_deref()
}
