use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use matchest::estimate::EstimateMode;
use matchest::graph::QueryModel;
use matchest::instances::{InstanceParams, Truth, Variant};
use matchest_cli::{
    cmd_bench, cmd_distinguish, cmd_estimate, cmd_exact, cmd_gen_bipartite, cmd_gen_gnm,
    cmd_gen_lower_bound, cmd_gen_perfect_matching, parse_sizes, Algorithm, ParamOverrides,
};

#[derive(Parser)]
#[command(
    name = "matchest",
    version,
    about = "Matching-size estimation behind query-counted graph oracles"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    List,
    Matrix,
}

impl From<ModelArg> for QueryModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::List => QueryModel::List,
            ModelArg::Matrix => QueryModel::Matrix,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Additive,
    Multiplicative,
}

impl From<ModeArg> for EstimateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Additive => EstimateMode::Additive,
            ModeArg::Multiplicative => EstimateMode::Multiplicative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    TwoThirds,
    Beyond,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::TwoThirds => Algorithm::TwoThirds,
            AlgorithmArg::Beyond => Algorithm::Beyond,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Fixed,
    Broken,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Fixed => Variant::Fixed,
            VariantArg::Broken => Variant::Broken,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TruthArg {
    Yes,
    No,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate instances and test graphs.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Exact maximum matching (and König cover on bipartite inputs).
    Exact {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an estimator against a graph file.
    Estimate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "two-thirds")]
        algorithm: AlgorithmArg,
        #[arg(long, value_enum, default_value = "matrix")]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "additive")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with parameter overrides.
        #[arg(long)]
        params_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query-scaling benchmark over random graphs; writes per-trial CSV.
    Bench {
        /// Comma-separated vertex counts, e.g. 1000,2000,4000.
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, value_enum, default_value = "two-thirds")]
        algorithm: AlgorithmArg,
        #[arg(long, value_enum, default_value = "matrix")]
        model: ModelArg,
        /// Each benchmark graph gets this many edges per vertex.
        #[arg(long, default_value_t = 10)]
        edges_per_vertex: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random-walk YES/NO distinguishability experiment.
    Distinguish {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        n_param: usize,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long)]
        d: usize,
        /// Walk length; defaults to 2*d.
        #[arg(long)]
        walk_len: Option<usize>,
        #[arg(long, default_value_t = 64)]
        walks: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Layered YES/NO hard instance (graph + labels + manifest).
    LowerBound {
        #[arg(long)]
        n_param: usize,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum)]
        truth: TruthArg,
        #[arg(long, value_enum, default_value = "fixed")]
        variant: VariantArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = "instance")]
        name: String,
    },
    /// Uniform random graph with exactly m edges.
    Gnm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bipartite random graph with independent edges.
    Bipartite {
        #[arg(long)]
        n_left: usize,
        #[arg(long)]
        n_right: usize,
        #[arg(long)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Disjoint-edges graph (a perfect matching).
    PerfectMatching {
        #[arg(long)]
        pairs: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> matchest::Result<()> {
    match cli.cmd {
        Cmd::Gen { kind } => match kind {
            GenKind::LowerBound {
                n_param,
                epsilon,
                d,
                truth,
                variant,
                seed,
                out_dir,
                name,
            } => {
                let params = InstanceParams {
                    n_param,
                    epsilon,
                    d,
                    truth: match truth {
                        TruthArg::Yes => Truth::Yes,
                        TruthArg::No => Truth::No,
                    },
                    variant: variant.into(),
                    seed,
                };
                let manifest = cmd_gen_lower_bound(params, &out_dir, &name)?;
                println!("{}", serde_json::to_string_pretty(&manifest).unwrap());
            }
            GenKind::Gnm { n, m, seed, out } => {
                let v = cmd_gen_gnm(n, m, seed, &out)?;
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            }
            GenKind::Bipartite {
                n_left,
                n_right,
                edge_prob,
                seed,
                out,
            } => {
                let v = cmd_gen_bipartite(n_left, n_right, edge_prob, seed, &out)?;
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            }
            GenKind::PerfectMatching { pairs, out } => {
                let v = cmd_gen_perfect_matching(pairs, &out)?;
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
            }
        },
        Cmd::Exact { graph, out } => {
            cmd_exact(&graph, out.as_deref())?;
        }
        Cmd::Estimate {
            graph,
            algorithm,
            model,
            mode,
            seed,
            params_file,
            out,
        } => {
            let overrides = match params_file {
                Some(p) => ParamOverrides::from_file(&p)?,
                None => ParamOverrides::default(),
            };
            cmd_estimate(
                &graph,
                algorithm.into(),
                model.into(),
                mode.into(),
                seed,
                &overrides,
                out.as_deref(),
            )?;
        }
        Cmd::Bench {
            sizes,
            trials,
            algorithm,
            model,
            edges_per_vertex,
            seed,
            params_file,
            out,
        } => {
            let overrides = match params_file {
                Some(p) => ParamOverrides::from_file(&p)?,
                None => ParamOverrides::default(),
            };
            let summary = cmd_bench(
                &parse_sizes(&sizes)?,
                trials,
                algorithm.into(),
                model.into(),
                edges_per_vertex,
                seed,
                &overrides,
                out.as_deref(),
            )?;
            eprintln!("loglog_slope={:.4}", summary.slope);
        }
        Cmd::Distinguish {
            variant,
            n_param,
            epsilon,
            d,
            walk_len,
            walks,
            trials,
            seed,
            out,
        } => {
            cmd_distinguish(
                variant.into(),
                n_param,
                epsilon,
                d,
                walk_len.unwrap_or(2 * d),
                walks,
                trials,
                seed,
                out.as_deref(),
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                matchest::Error::Usage(_) | matchest::Error::Parse(_) => ExitCode::from(2),
                matchest::Error::Generation(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}
