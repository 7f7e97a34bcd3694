// SPDX-License-Identifier: Apache-2.0

//! `cmcs`: data preparation, single recruitments and experiment runs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cmcs_bench::data::{self, Dataset, Origin};
use cmcs_bench::error::{core_data, core_infeasible, BenchError};
use cmcs_bench::experiments::{
    random_project, run_cluster_quality, run_quality_vs_oracle, run_runtime_scaling, run_strategy_tradeoff,
};
use cmcs_bench::pipeline::{
    embed, harness_weights, load_or_build_artifacts, recruit_heuristic, solve_exact, Embedding, Heuristic,
    PipelineConfig,
};
use cmcs_bench::spec::{ExperimentKind, ExperimentSpec};
use cmcs_core::cluster::{kmeans, modularity, CandidatePool, ClusterAssignment};
use cmcs_core::dataset::{
    default_mapping, label_categories, read_category_csv, synthesize_attributes,
    SynthesisConfig,
};
use cmcs_core::domain::{perceive_skills, read_workers_csv, write_workers_csv, UncertaintyModel};
use cmcs_core::embed::{reduce_dim, EmbeddingMatrix, ReduceMethod, TrainConfig};
use cmcs_core::exact::{write_solution_csv, SolverConfig, Strategy};
use cmcs_core::ga::{evolve, pso_baseline, GaConfig, GaProblem};
use cmcs_core::graph::{load_edge_list, relations_among, DirectWeight, Recruiter};
use cmcs_core::seed::{self, tag};
use rand::seq::index;

#[derive(Parser)]
#[command(name = "cmcs", version, about = "Team recruitment for collaborative mobile crowdsourcing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load an edge list and print its size and content hash.
    Ingest(IngestArgs),
    /// Synthesize the worker attribute table for a graph.
    Synth(SynthArgs),
    /// Embed every node of a graph.
    Embed(EmbedArgs),
    /// Cluster an embedding with k-means.
    Cluster(ClusterArgs),
    /// Recruit one team and print it as CSV.
    Recruit(RecruitArgs),
    /// Run an experiment described by a spec file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list; defaults to the ego-Facebook file when present and to the
    /// planted-community stand-in otherwise.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Seed of the stand-in graph and of attribute synthesis.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Require the published ego-Facebook node and edge counts.
    #[arg(long)]
    ego_facebook: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `node_id,category` file with raw categories `cat0..cat9`.
    #[arg(long)]
    categories: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Worker attribute CSV; synthesized when absent.
    #[arg(long)]
    workers: Option<PathBuf>,
    #[arg(long, default_value = "edge-only")]
    method: Embedding,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training epochs (defaults to 10).
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reduce {
    Tsne,
    Pca,
    None,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    embedding: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "tsne")]
    reduce: Reduce,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list used to report modularity on standard error.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Ga,
    Pso,
}

#[derive(Args)]
struct RecruitArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    workers: Option<PathBuf>,
    #[arg(long, default_value = "platform")]
    strategy: Strategy,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    /// Objective weights `η1,η2,η3,η4`, summing to 1.
    #[arg(long, default_value = "0.25,0.25,0.25,0.25")]
    eta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of required skills.
    #[arg(long, default_value_t = 5)]
    skills: usize,
    /// Number of workers sampled as the candidate pool.
    #[arg(long, default_value_t = 14)]
    pool: usize,
    /// Cluster file restricting the heuristic search (`node_id,cluster`).
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// How the cluster file was produced.
    #[arg(long, default_value = "edge-attribute")]
    embedding: Embedding,
    #[arg(long, default_value_t = 1000)]
    population: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Report the elapsed time in the summary line.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    /// Directory caching the clusterings between runs.
    #[arg(long, default_value = "artifacts")]
    artifacts: PathBuf,
    /// Overrides the spec's output path; `-` is standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(b) = cause.downcast_ref::<BenchError>() {
            if b.is_infeasible() {
                return 3;
            }
            if b.is_data() {
                return 2;
            }
        }
        if let Some(c) = cause.downcast_ref::<cmcs_core::Error>() {
            if core_infeasible(c) {
                return 3;
            }
            if core_data(c) {
                return 2;
            }
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a),
        Command::Embed(a) => embed_cmd(a),
        Command::Cluster(a) => cluster(a),
        Command::Recruit(a) => recruit(a),
        Command::Bench(a) => bench(a),
    }
}

fn output(path: &Path) -> anyhow::Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let f = File::create(path).map_err(|e| BenchError::io(path, e))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn open(path: &Path) -> anyhow::Result<File> {
    Ok(File::open(path).map_err(|e| BenchError::io(path, e))?)
}

/// The graph with synthesized attributes, or with `workers` when given.
fn dataset(g: &GraphArgs, workers: Option<&Path>) -> anyhow::Result<Dataset> {
    let ds = match &g.edges {
        Some(p) => data::build_dataset(load_edge_list(p)?, Origin::EdgeList(p.clone()), g.data_seed)?,
        None => data::load_or_synthesize(g.data_seed)?,
    };
    match workers {
        None => Ok(ds),
        Some(p) => {
            let (ws, num_skills) = read_workers_csv(open(p)?, p)?;
            Ok(data::with_workers(ds.graph, ds.origin, ws, num_skills)?)
        }
    }
}

fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    let g = if a.ego_facebook { data::load_ego_facebook(&a.edges)? } else { load_edge_list(&a.edges)? };
    let mut out = output(Path::new("-"))?;
    writeln!(out, "nodes,edges,density,hash")?;
    writeln!(out, "{},{},{},{}", g.num_nodes(), g.num_edges(), g.density(), hex::encode(g.content_hash()))?;
    Ok(())
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    let ds = match &a.categories {
        None => dataset(&a.graph, None)?,
        Some(cats) => {
            let (g, origin) = match &a.graph.edges {
                Some(p) => (load_edge_list(p)?, Origin::EdgeList(p.clone())),
                None => {
                    let ds = data::load_or_synthesize(a.graph.data_seed)?;
                    (ds.graph, ds.origin)
                }
            };
            let cfg = SynthesisConfig::with_seed(a.graph.data_seed);
            let names = cfg.catalog.names().to_vec();
            let raw = read_category_csv(open(cats)?, cats)?;
            let labels = label_categories(g.node_ids(), &raw, &default_mapping(&names), &names[0]);
            let workers = synthesize_attributes(&g, &labels, &cfg)?;
            data::with_workers(g, origin, workers, names.len())?
        }
    };
    let mut out = output(&a.out)?;
    write_workers_csv(&mut out, &ds.workers, ds.catalog.len())?;
    out.flush()?;
    Ok(())
}

fn embed_cmd(a: EmbedArgs) -> anyhow::Result<()> {
    let ds = dataset(&a.graph, a.workers.as_deref())?;
    let mut cfg = PipelineConfig { seed: a.seed, ..PipelineConfig::default() };
    if let Some(epochs) = a.epochs {
        cfg.edge_train = TrainConfig { epochs, ..cfg.edge_train };
        cfg.attr_train = TrainConfig { epochs, ..cfg.attr_train };
    }
    let e = embed(&ds.graph, &ds.workers, a.method, &cfg)?;
    let mut out = output(&a.out)?;
    e.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cluster(a: ClusterArgs) -> anyhow::Result<()> {
    let e = EmbeddingMatrix::read_csv(open(&a.embedding)?, &a.embedding)?;
    let points = match a.reduce {
        Reduce::Tsne => reduce_dim(&e, 2, ReduceMethod::Tsne, a.seed)?,
        Reduce::Pca => reduce_dim(&e, 2.min(e.dim), ReduceMethod::Pca, a.seed)?,
        Reduce::None => e,
    };
    let c = kmeans(&points, a.k, a.seed)?;
    if let Some(p) = &a.edges {
        let g = load_edge_list(p)?;
        eprintln!("modularity {}", modularity(&g, &c)?);
    }
    let mut out = output(&a.out)?;
    c.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn parse_eta(s: &str) -> anyhow::Result<[f64; 4]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("invalid --eta {s:?}"))?;
    match <[f64; 4]>::try_from(v) {
        Ok(eta) => Ok(eta),
        Err(_) => bail!("--eta needs four comma-separated weights"),
    }
}

fn recruit(a: RecruitArgs) -> anyhow::Result<()> {
    let eta = parse_eta(&a.eta)?;
    if a.method != Method::Exact && a.strategy == Strategy::Leader {
        bail!("the heuristic methods recruit with the platform strategy only");
    }
    let ds = dataset(&a.graph, a.workers.as_deref())?;
    let n = ds.graph.num_nodes();
    if a.pool > n {
        return Err(cmcs_core::Error::PopulationTooSmall { requested: a.pool, available: n }.into());
    }
    if a.pool < a.skills {
        return Err(cmcs_core::Error::Infeasible { workers: a.pool, skills: a.skills }.into());
    }
    let mut rng = seed::rng(a.seed, &[tag::SUBSAMPLE]);
    let mut nodes = index::sample(&mut rng, n, a.pool).into_vec();
    nodes.sort_unstable();
    let workers = ds.workers_at(&nodes);
    let relations = relations_among(&ds.graph, &nodes, DirectWeight::One);
    let project = random_project(0, ds.catalog.len(), a.skills, a.seed)?;
    let model = UncertaintyModel::default();
    let weights = harness_weights(eta, &workers, &model)?;
    let start = Instant::now();
    let (team, view) = match a.method {
        Method::Exact => solve_exact(&workers, &relations, &project, &weights, &model, &SolverConfig::new(a.strategy), a.seed)?,
        Method::Ga | Method::Pso => {
            let view = perceive_skills(&workers, &relations, Recruiter::Platform, &model, a.seed)?;
            let ga = GaConfig { population: a.population, iterations: a.iterations, seed: a.seed, ..GaConfig::default() };
            let heuristic = if a.method == Method::Ga { Heuristic::Ga } else { Heuristic::Pso };
            let outcome = match &a.clusters {
                Some(p) => {
                    let clusters = ClusterAssignment::read_csv(open(p)?, p)?;
                    recruit_heuristic(&view, &project, &weights, &clusters, a.embedding, heuristic, &ga)?
                }
                None => {
                    // Without clusters the search covers the whole sample.
                    let pool = CandidatePool { members: (0..view.len()).collect(), tags: None };
                    let problem = GaProblem { view: &view, project: &project, weights: &weights, pool: &pool };
                    match heuristic {
                        Heuristic::Ga => evolve(&problem, &ga)?,
                        Heuristic::Pso => pso_baseline(&problem, &ga)?,
                    }
                }
            };
            (outcome.team, view)
        }
    };
    let elapsed = a.timing.then(|| start.elapsed());
    let mut out = output(Path::new("-"))?;
    write_solution_csv(&mut out, &team, &view, a.strategy, elapsed)?;
    out.flush()?;
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.spec).map_err(|e| BenchError::io(&a.spec, e))?;
    let spec = ExperimentSpec::parse(&text)?;
    let ds = dataset(&a.graph, None)?;
    let artifacts = || load_or_build_artifacts(&ds, &PipelineConfig::default(), &a.artifacts);
    let table = match spec.kind {
        ExperimentKind::StrategyTradeoff => run_strategy_tradeoff(&spec, &ds)?.0,
        ExperimentKind::QualityVsOracle => run_quality_vs_oracle(&spec, &ds, &artifacts()?)?.0,
        ExperimentKind::RuntimeScaling => run_runtime_scaling(&spec, &ds, Some(&artifacts()?))?.0,
        ExperimentKind::ClusterQuality => run_cluster_quality(&ds, &artifacts()?)?.0,
    };
    let path = a.out.or(spec.output.clone()).unwrap_or_else(|| PathBuf::from("-"));
    let mut out = output(&path)?;
    table.write_csv(&mut out, &spec.config_hash(&ds.hash))?;
    out.flush()?;
    Ok(())
}
