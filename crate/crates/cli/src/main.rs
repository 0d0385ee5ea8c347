use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hc_core::expansion::{approx_expansion, exact_expansion};
use hc_core::instances::InstanceSpec;
use hc_core::oracle::brute_force_opt;
use hc_core::solver::{self, DEFAULT_BETA};
use hc_core::sparsify::{self, SparsifyConfig};
use hc_core::stream::{stream_hc, EdgeStream, StreamConfig, StreamOrder};
use hc_core::{verify, CutFinder, HCTree, WeightedGraph};
use serde::Serialize;

mod experiment;

#[derive(Parser)]
#[command(name = "hc", version, about = "Hierarchical clustering under Dasgupta's cost")]
struct Cli {
    /// Default seed for every randomized step.
    #[arg(long, global = true, env = "HC_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Finder {
    Exact,
    Spectral,
    RandomRestart,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Natural,
    Shuffled,
    Adversarial,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = Finder::Spectral)]
    finder: Finder,
    /// Random bisections tried per node by the random-restart finder.
    #[arg(long, default_value_t = 4)]
    restarts: usize,
}

impl SolveArgs {
    fn finder(&self, seed: u64) -> CutFinder {
        match self.finder {
            Finder::Exact => CutFinder::exact(),
            Finder::Spectral => CutFinder::spectral(seed),
            Finder::RandomRestart => CutFinder::random_restart(seed, self.restarts),
        }
    }
}

#[derive(clap::Args)]
struct StreamArgs {
    #[arg(long, value_enum, default_value_t = Order::Shuffled)]
    order: Order,
    /// One side of the bipartition whose crossing edges arrive last
    /// (adversarial order only).
    #[arg(long, value_delimiter = ',')]
    side: Vec<usize>,
    #[arg(long = "eps", alias = "epsilon", default_value_t = 0.2)]
    epsilon: f64,
    /// Oversampling constant of the sparsifier.
    #[arg(long = "budget-c", default_value_t = SparsifyConfig::default().c)]
    c: f64,
}

impl StreamArgs {
    fn order(&self, seed: u64) -> StreamOrder {
        match self.order {
            Order::Natural => StreamOrder::Natural,
            Order::Shuffled => StreamOrder::Shuffled(seed),
            Order::Adversarial => StreamOrder::AdversarialCutLast(self.side.clone()),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance from a JSON spec such as '{"family":"clique","n":4}'.
    Gen {
        spec: String,
        /// Edge-list output; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Write the hidden ground truth as JSON.
        #[arg(long)]
        hidden: Option<PathBuf>,
        /// Keep the seeds written in the spec instead of the global seed.
        #[arg(long)]
        keep_seed: bool,
    },
    /// Cost of a tree on a graph.
    Cost { graph: PathBuf, tree: PathBuf },
    /// Exact optimum by subset DP (at most 16 vertices).
    Opt { graph: PathBuf },
    /// Recursive balanced-cut clustering with a lower bound.
    Solve {
        graph: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Cut sparsifier built in one streaming pass.
    Sparsify {
        graph: PathBuf,
        #[command(flatten)]
        stream: StreamArgs,
        /// Write the sparsifier as an edge list.
        out: Option<PathBuf>,
    },
    /// Single-pass pipeline: sparsify while streaming, then cluster.
    StreamSolve {
        graph: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        stream: StreamArgs,
    },
    /// Edge expansion, exact up to 20 vertices, spectral otherwise.
    Expansion {
        graph: PathBuf,
        #[arg(long)]
        approx: bool,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
    },
    /// Run a property suite: all, split-lemmas, or one of the suite names.
    Verify { suite: String },
    /// Run a batch described by a JSON config and write CSV.
    Experiment {
        config: PathBuf,
        /// Overrides the config's output path; "-" is stdout.
        #[arg(short, long)]
        output: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<hc_core::Error> for Failure {
    fn from(e: hc_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    write_or_print(None, &(serde_json::to_string_pretty(value)? + "\n"))
}

/// Writes to `path`, or to stdout when absent. A closed stdout pipe is not
/// an error.
fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

#[derive(Serialize)]
struct SparsifySummary {
    edges_in: usize,
    edges_out: usize,
    words_peak: usize,
    passes: usize,
    budget_words: usize,
    sampled: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Gen {
            spec,
            out,
            hidden,
            keep_seed,
        } => {
            let mut spec: InstanceSpec = serde_json::from_str(&spec)?;
            if !keep_seed {
                spec = spec.with_seed(seed);
            }
            let generated = spec.generate()?;
            write_or_print(out.as_deref(), &generated.graph.to_edge_list())?;
            if let Some(h) = hidden {
                std::fs::write(h, serde_json::to_string_pretty(&generated.hidden)?)?;
            }
        }
        Cmd::Cost { graph, tree } => {
            let g = WeightedGraph::load(graph)?;
            let t = HCTree::parse(&std::fs::read_to_string(tree)?)?;
            write_or_print(None, &format!("{}\n", t.cost_lca(&g)?))?;
        }
        Cmd::Opt { graph } => print_json(&brute_force_opt(&WeightedGraph::load(graph)?)?)?,
        Cmd::Solve { graph, solve } => {
            let g = WeightedGraph::load(graph)?;
            print_json(&solver::solve(&g, solve.beta, &solve.finder(seed))?)?;
        }
        Cmd::Sparsify { graph, stream, out } => {
            let mut s = EdgeStream::from_file(graph, &stream.order(seed))?;
            let n = s.n();
            let cfg = SparsifyConfig { c: stream.c };
            let (h, state) = sparsify::stream_sparsify(&mut s, n, stream.epsilon, seed, &cfg)?;
            if let Some(p) = out {
                h.save(p)?;
            }
            print_json(&SparsifySummary {
                edges_in: state.edges_in,
                edges_out: state.edges_out,
                words_peak: state.words_peak,
                passes: s.passes_used(),
                budget_words: state.budget_words,
                sampled: state.sampled,
            })?;
        }
        Cmd::StreamSolve { graph, solve, stream } => {
            let g = WeightedGraph::load(&graph)?;
            let mut s = EdgeStream::from_file(&graph, &stream.order(seed))?;
            let cfg = StreamConfig {
                epsilon: stream.epsilon,
                beta: solve.beta,
                finder: solve.finder(seed),
                sparsify: SparsifyConfig { c: stream.c },
                seed,
            };
            print_json(&stream_hc(&mut s, &cfg, Some(&g))?)?;
        }
        Cmd::Expansion { graph, approx, rounds } => {
            let g = WeightedGraph::load(graph)?;
            let est = if approx {
                approx_expansion(&g, rounds)?
            } else {
                exact_expansion(&g)?
            };
            print_json(&est)?;
        }
        Cmd::Verify { suite } => {
            let mut reports = Vec::new();
            for name in verify::expand_suite(&suite)? {
                reports.push(verify::run_suite(name, seed)?);
            }
            print_json(&reports)?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.suite.as_str()).collect();
            if !failed.is_empty() {
                return Err(Failure::Verification(format!("failed suites: {}", failed.join(", "))));
            }
        }
        Cmd::Experiment { config, output } => {
            let cfg: experiment::ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(config)?)?;
            let rows = experiment::run(&cfg);
            match output.as_deref().unwrap_or(&cfg.output) {
                "-" => experiment::write_csv(&rows, std::io::stdout().lock())?,
                path => experiment::write_csv(&rows, std::fs::File::create(path)?)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("hc: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("hc: {msg}");
            ExitCode::from(2)
        }
    }
}
