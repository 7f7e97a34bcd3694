// SPDX-License-Identifier: Apache-2.0

//! The four Monte-Carlo experiments. Every realization draws from its own
//! stream `derive(seed, realization, ...)`, realizations run in parallel
//! and are folded in index order, so results do not depend on scheduling.

use std::io::Write;
use std::time::{Duration, Instant};

use cmcs_core::cluster::modularity;
use cmcs_core::domain::{perceive_skills, Project, RecruiterView, Team, UncertaintyModel, Worker};
use cmcs_core::exact::{falling_factorial, solve_platform, BoundMode, SolverConfig, Strategy, TIME_LIMIT_MESSAGE};
use cmcs_core::ga::GaConfig;
use cmcs_core::graph::{all_pairs_hops, relation_weights, relations_among, sample_subpopulation, DirectWeight, Recruiter, RelationModel};
use cmcs_core::seed::{self, tag};
use rand::seq::index;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{BenchError, Result};
use crate::pipeline::{admissible, harness_weights, recruit_heuristic, solve_exact, Artifacts, Embedding, Heuristic};
use crate::spec::ExperimentSpec;
use crate::stats::mean;

/// Resampling attempts per realization before giving up.
pub const MAX_ATTEMPTS: usize = 1000;
/// Exact solves above this many complete assignments are skipped in the
/// runtime sweep.
pub const EXACT_ASSIGNMENT_LIMIT: u128 = 2_000_000_000;

/// A CSV result with its schema header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Header, rows, then `# config_hash=<hash>`.
    pub fn write_csv<W: Write>(&self, mut out: W, config_hash: &str) -> std::io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        writeln!(out, "# config_hash={config_hash}")
    }
}

/// Per-team quality, measured against the ground truth.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TeamMetrics {
    /// Mean true skill on the assigned skill.
    pub skill: f64,
    /// The same as seen by the recruiter.
    pub perceived_skill: f64,
    /// Mean recruiter uncertainty about the members.
    pub uncertainty: f64,
    /// Mean cost per worker.
    pub cost: f64,
    /// Mean true relation weight over member pairs.
    pub relation: f64,
    /// Objective under the recruiter's perception.
    pub objective: f64,
}

impl TeamMetrics {
    /// `workers` and `truth` are aligned with `view`.
    pub fn of(team: &Team, workers: &[Worker], view: &RecruiterView, truth: &RelationModel) -> Self {
        let k = team.members.len() as f64;
        let skill = team.members.iter().zip(&team.skills).map(|(&m, &s)| workers[m].skills[s]).sum::<f64>() / k;
        let perceived_skill = team.members.iter().zip(&team.skills).map(|(&m, &s)| view.skill(m, s)).sum::<f64>() / k;
        let cost = team.members.iter().zip(&team.skills).map(|(&m, &s)| workers[m].costs[s]).sum::<f64>() / k;
        let uncertainty = team.members.iter().map(|&m| view.uncertainty[m]).sum::<f64>() / k;
        let mut rel = 0.0;
        let mut pairs = 0usize;
        for (i, &a) in team.members.iter().enumerate() {
            for &b in &team.members[i + 1..] {
                rel += truth.get(a, b);
                pairs += 1;
            }
        }
        Self {
            skill,
            perceived_skill,
            uncertainty,
            cost,
            relation: if pairs == 0 { 0.0 } else { rel / pairs as f64 },
            objective: team.objective,
        }
    }

    fn average(all: &[TeamMetrics]) -> Self {
        let f = |g: fn(&TeamMetrics) -> f64| mean(&all.iter().map(g).collect::<Vec<_>>());
        Self {
            skill: f(|m| m.skill),
            perceived_skill: f(|m| m.perceived_skill),
            uncertainty: f(|m| m.uncertainty),
            cost: f(|m| m.cost),
            relation: f(|m| m.relation),
            objective: f(|m| m.objective),
        }
    }

    fn fields(&self) -> Vec<String> {
        [self.skill, self.perceived_skill, self.uncertainty, self.cost, self.relation, self.objective]
            .iter()
            .map(|v| v.to_string())
            .collect()
    }
}

/// A project needing `k` distinct skills drawn uniformly from the catalog.
pub fn random_project(id: u64, num_skills: usize, k: usize, seed: u64) -> Result<Project> {
    if k > num_skills {
        return Err(cmcs_core::Error::Infeasible { workers: num_skills, skills: k }.into());
    }
    let mut rng = seed::rng(seed, &[tag::REALIZATION, 0x9B]);
    let skills = index::sample(&mut rng, num_skills, k).into_vec();
    Ok(Project::requiring(id, num_skills, &skills)?)
}


fn model(spec: &ExperimentSpec) -> UncertaintyModel {
    UncertaintyModel { sigma0: spec.sigma0, ..UncertaintyModel::default() }
}

// ---------------------------------------------------------------------------
// Strategy trade-off

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub workers: usize,
    pub density: f64,
    pub platform: TeamMetrics,
    pub leader: TeamMetrics,
    /// Largest `|objective_platform − objective_leader|` over realizations.
    pub max_objective_gap: f64,
    pub realizations: usize,
}

/// Platform versus leader recruitment on density-controlled subsamples.
pub fn run_strategy_tradeoff(spec: &ExperimentSpec, ds: &Dataset) -> Result<(Table, Vec<TradeoffPoint>)> {
    let model = model(spec);
    let mut points = Vec::new();
    for &w in &spec.workers {
        for (di, &density) in spec.densities.iter().enumerate() {
            let runs: Vec<(TeamMetrics, TeamMetrics)> = (0..spec.realizations)
                .into_par_iter()
                .map(|r| tradeoff_realization(spec, ds, &model, w, di, density, r))
                .collect::<Result<_>>()?;
            let (p, l): (Vec<_>, Vec<_>) = runs.iter().copied().unzip();
            points.push(TradeoffPoint {
                workers: w,
                density,
                platform: TeamMetrics::average(&p),
                leader: TeamMetrics::average(&l),
                max_objective_gap: runs.iter().map(|(p, l)| (p.objective - l.objective).abs()).fold(0.0, f64::max),
                realizations: runs.len(),
            });
        }
    }
    let mut table = Table::new(&[
        "workers", "density", "strategy", "skill", "perceived_skill", "uncertainty", "cost", "relation", "objective", "max_objective_gap", "realizations",
    ]);
    for p in &points {
        for (name, m) in [("platform", &p.platform), ("leader", &p.leader)] {
            let mut row = vec![p.workers.to_string(), p.density.to_string(), name.to_string()];
            row.extend(m.fields());
            row.push(p.max_objective_gap.to_string());
            row.push(p.realizations.to_string());
            table.push(row);
        }
    }
    Ok((table, points))
}

fn tradeoff_realization(
    spec: &ExperimentSpec,
    ds: &Dataset,
    model: &UncertaintyModel,
    w: usize,
    di: usize,
    density: f64,
    r: usize,
) -> Result<(TeamMetrics, TeamMetrics)> {
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed::derive(spec.seed, &[tag::REALIZATION, w as u64, di as u64, r as u64, attempt as u64]);
        let sub = sample_subpopulation(&ds.graph, w, density, s)?;
        let workers: Vec<Worker> = sub
            .node_ids()
            .iter()
            .map(|&id| ds.workers[ds.graph.index_of(id).expect("subsample of the dataset graph")].clone())
            .collect();
        let truth = relation_weights(&sub, &all_pairs_hops(&sub), DirectWeight::One);
        let project = random_project(r as u64, ds.catalog.len(), spec.skills, s)?;
        let weights = harness_weights(spec.eta, &workers, model)?;
        let solve = |strategy| {
            let cfg = SolverConfig::new(strategy);
            solve_exact(&workers, &truth, &project, &weights, model, &cfg, s)
        };
        match (solve(Strategy::Platform), solve(Strategy::Leader)) {
            (Ok((pt, pv)), Ok((lt, lv))) => {
                return Ok((TeamMetrics::of(&pt, &workers, &pv, &truth), TeamMetrics::of(&lt, &workers, &lv, &truth)));
            }
            (Err(e), _) | (_, Err(e)) if e.is_infeasible() => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Err(BenchError::Resampling(MAX_ATTEMPTS))
}

// ---------------------------------------------------------------------------
// Quality versus the exact optimum

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityRecord {
    pub exact: TeamMetrics,
    pub edge_only: TeamMetrics,
    pub edge_attribute: TeamMetrics,
    /// Heuristic teams failing validation.
    pub violations: usize,
    /// Samples rejected before this one was admitted.
    pub rejected: usize,
}

/// Exact, edge-only GA and edge-attribute GA on the same platform view of
/// uniformly sampled workers. Samples the heuristics cannot serve are
/// redrawn.
pub fn run_quality_vs_oracle(
    spec: &ExperimentSpec,
    ds: &Dataset,
    artifacts: &Artifacts,
) -> Result<(Table, Vec<QualityRecord>)> {
    let model = model(spec);
    let w = spec.workers[0];
    let records: Vec<QualityRecord> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| quality_realization(spec, ds, artifacts, &model, w, r))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&[
        "method", "skill", "perceived_skill", "uncertainty", "cost", "relation", "objective", "ratio_to_exact", "violations", "realizations",
    ]);
    let exact = TeamMetrics::average(&records.iter().map(|q| q.exact).collect::<Vec<_>>());
    let violations: usize = records.iter().map(|q| q.violations).sum();
    for (name, pick) in [
        ("exact", (|q: &QualityRecord| q.exact) as fn(&QualityRecord) -> TeamMetrics),
        ("ga-edge-only", |q| q.edge_only),
        ("ga-edge-attribute", |q| q.edge_attribute),
    ] {
        let m = TeamMetrics::average(&records.iter().map(pick).collect::<Vec<_>>());
        let mut row = vec![name.to_string()];
        row.extend(m.fields());
        row.push((m.objective / exact.objective).to_string());
        row.push(if name == "exact" { 0 } else { violations }.to_string());
        row.push(records.len().to_string());
        table.push(row);
    }
    Ok((table, records))
}

fn quality_realization(
    spec: &ExperimentSpec,
    ds: &Dataset,
    artifacts: &Artifacts,
    model: &UncertaintyModel,
    w: usize,
    r: usize,
) -> Result<QualityRecord> {
    let n = ds.graph.num_nodes();
    if w > n {
        return Err(cmcs_core::Error::PopulationTooSmall { requested: w, available: n }.into());
    }
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed::derive(spec.seed, &[tag::REALIZATION, r as u64, attempt as u64]);
        let mut rng = seed::rng(s, &[tag::SUBSAMPLE]);
        let mut nodes = index::sample(&mut rng, n, w).into_vec();
        nodes.sort_unstable();
        let ids: Vec<u64> = nodes.iter().map(|&i| ds.graph.id(i)).collect();
        let project = random_project(r as u64, ds.catalog.len(), spec.skills, s)?;
        if !admissible(&ids, artifacts, &project)? {
            continue;
        }
        let workers = ds.workers_at(&nodes);
        let sample_truth = relations_among(&ds.graph, &nodes, DirectWeight::One);
        let weights = harness_weights(spec.eta, &workers, model)?;
        let view = perceive_skills(&workers, &sample_truth, Recruiter::Platform, model, s)?;
        let exact = solve_platform(&view, &project, &weights, &SolverConfig::new(Strategy::Platform))?;
        let ga = GaConfig {
            population: spec.population,
            iterations: spec.iterations,
            seed: s,
            ..GaConfig::default()
        };
        let mut violations = 0;
        let mut heuristic = |kind| -> Result<TeamMetrics> {
            let out = recruit_heuristic(&view, &project, &weights, artifacts.get(kind), kind, Heuristic::Ga, &ga)?;
            if out.team.validate(&project).is_err() {
                violations += 1;
            }
            Ok(TeamMetrics::of(&out.team, &workers, &view, &sample_truth))
        };
        let edge_only = heuristic(Embedding::EdgeOnly)?;
        let edge_attribute = heuristic(Embedding::EdgeAttribute)?;
        return Ok(QualityRecord {
            exact: TeamMetrics::of(&exact, &workers, &view, &sample_truth),
            edge_only,
            edge_attribute,
            violations,
            rejected: attempt,
        });
    }
    Err(BenchError::Resampling(MAX_ATTEMPTS))
}

// ---------------------------------------------------------------------------
// Runtime scaling

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    TimeLimit,
    Skipped,
}

impl RunStatus {
    fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::TimeLimit => "time_limit",
            RunStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimePoint {
    pub method: &'static str,
    pub workers: usize,
    pub skills: usize,
    /// Median wall-clock seconds over the realizations.
    pub seconds: f64,
    pub status: RunStatus,
}

/// `|S_p| = min(⌈|W|/4⌉, spec.skills)`.
pub fn runtime_skills(w: usize, cap: usize) -> usize {
    w.div_ceil(4).min(cap)
}

fn median(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n % 2 == 1 {
        x[n / 2]
    } else {
        0.5 * (x[n / 2 - 1] + x[n / 2])
    }
}

/// Wall-clock of one recruitment per solver and population size, from the
/// sampled workers to the team. The exact solver enumerates without
/// pruning; the GA pipeline uses the precomputed edge-attribute clusters.
/// Realizations run one after another so timings do not share cores.
pub fn run_runtime_scaling(
    spec: &ExperimentSpec,
    ds: &Dataset,
    artifacts: Option<&Artifacts>,
) -> Result<(Table, Vec<RuntimePoint>)> {
    let model = model(spec);
    let n = ds.graph.num_nodes();
    let mut points = Vec::new();
    for &w in &spec.workers {
        if w > n {
            return Err(cmcs_core::Error::PopulationTooSmall { requested: w, available: n }.into());
        }
        let k = runtime_skills(w, spec.skills);
        let mut exact_times = Vec::new();
        let mut exact_status = if falling_factorial(w, k) > EXACT_ASSIGNMENT_LIMIT { RunStatus::Skipped } else { RunStatus::Ok };
        let mut ga_times = Vec::new();
        let mut ga_status = if artifacts.is_some() { RunStatus::Ok } else { RunStatus::Skipped };
        for r in 0..spec.realizations {
            let (workers, sample_truth, project, weights, s) = loop_sample(spec, ds, artifacts, &model, w, k, r)?;
            if exact_status == RunStatus::Ok {
                let cfg = SolverConfig {
                    bound_mode: BoundMode::None,
                    time_limit: spec.time_limit.map(Duration::from_secs_f64),
                    ..SolverConfig::new(Strategy::Platform)
                };
                let t = Instant::now();
                let view = perceive_skills(&workers, &sample_truth, Recruiter::Platform, &model, s)?;
                match solve_platform(&view, &project, &weights, &cfg) {
                    Ok(_) => exact_times.push(t.elapsed().as_secs_f64()),
                    Err(cmcs_core::Error::InvalidArgument(m)) if m == TIME_LIMIT_MESSAGE => {
                        exact_status = RunStatus::TimeLimit;
                        exact_times.push(t.elapsed().as_secs_f64());
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if let (RunStatus::Ok, Some(art)) = (ga_status, artifacts) {
                let ga = GaConfig {
                    population: spec.population,
                    iterations: spec.iterations,
                    seed: s,
                    ..GaConfig::default()
                };
                let t = Instant::now();
                let view = perceive_skills(&workers, &sample_truth, Recruiter::Platform, &model, s)?;
                let kind = Embedding::EdgeAttribute;
                match recruit_heuristic(&view, &project, &weights, art.get(kind), kind, Heuristic::Ga, &ga) {
                    Ok(_) => ga_times.push(t.elapsed().as_secs_f64()),
                    Err(e) if e.is_infeasible() => ga_status = RunStatus::Skipped,
                    Err(e) => return Err(e),
                }
            }
        }
        for (method, times, status) in [("exact", exact_times, exact_status), ("ga-edge-attribute", ga_times, ga_status)] {
            let seconds = if times.is_empty() { f64::NAN } else { median(times) };
            points.push(RuntimePoint { method, workers: w, skills: k, seconds, status });
        }
    }
    let mut table = Table::new(&["method", "workers", "skills", "seconds", "status"]);
    for p in &points {
        table.push(vec![
            p.method.to_string(),
            p.workers.to_string(),
            p.skills.to_string(),
            p.seconds.to_string(),
            p.status.as_str().to_string(),
        ]);
    }
    Ok((table, points))
}

type Sample = (Vec<Worker>, RelationModel, Project, cmcs_core::domain::ObjectiveWeights, u64);

fn loop_sample(
    spec: &ExperimentSpec,
    ds: &Dataset,
    artifacts: Option<&Artifacts>,
    model: &UncertaintyModel,
    w: usize,
    k: usize,
    r: usize,
) -> Result<Sample> {
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed::derive(spec.seed, &[tag::REALIZATION, w as u64, r as u64, attempt as u64]);
        let mut rng = seed::rng(s, &[tag::SUBSAMPLE]);
        let mut nodes = index::sample(&mut rng, ds.graph.num_nodes(), w).into_vec();
        nodes.sort_unstable();
        let project = random_project(r as u64, ds.catalog.len(), k, s)?;
        if let Some(art) = artifacts {
            let ids: Vec<u64> = nodes.iter().map(|&i| ds.graph.id(i)).collect();
            if !admissible(&ids, art, &project)? {
                continue;
            }
        }
        let workers = ds.workers_at(&nodes);
        let weights = harness_weights(spec.eta, &workers, model)?;
        return Ok((workers, relations_among(&ds.graph, &nodes, DirectWeight::One), project, weights, s));
    }
    Err(BenchError::Resampling(MAX_ATTEMPTS))
}

// ---------------------------------------------------------------------------
// Clustering quality

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterQuality {
    pub edge_only: f64,
    pub edge_attribute: f64,
}

/// Modularity of both clusterings on the full graph.
pub fn run_cluster_quality(ds: &Dataset, artifacts: &Artifacts) -> Result<(Table, ClusterQuality)> {
    let q = ClusterQuality {
        edge_only: modularity(&ds.graph, &artifacts.edge)?,
        edge_attribute: modularity(&ds.graph, &artifacts.attr)?,
    };
    let mut table = Table::new(&["embedding", "k", "modularity", "nodes", "edges"]);
    for (kind, value) in [(Embedding::EdgeOnly, q.edge_only), (Embedding::EdgeAttribute, q.edge_attribute)] {
        table.push(vec![
            kind.to_string(),
            artifacts.get(kind).k.to_string(),
            value.to_string(),
            ds.graph.num_nodes().to_string(),
            ds.graph.num_edges().to_string(),
        ]);
    }
    Ok((table, q))
}
