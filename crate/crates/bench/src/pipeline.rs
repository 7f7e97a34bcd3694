// SPDX-License-Identifier: Apache-2.0

//! Glue between the core modules: embedding and clustering artifacts, the
//! objective weights used by every experiment, and one-call recruiters.

use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use cmcs_core::cluster::{assign_skill_clusters, candidate_pool, kmeans, score_clusters_edge_only, ClusterAssignment, Selection};
use cmcs_core::domain::{perceive_skills, Normalizers, ObjectiveWeights, Project, RecruiterView, Team, UncertaintyModel, Worker};
use cmcs_core::embed::{embed_attributed, generate_walks, reduce_dim, train_skipgram, EmbeddingMatrix, ReduceMethod, TrainConfig};
use cmcs_core::exact::{solve_leader, solve_platform, SolverConfig, Strategy};
use cmcs_core::ga::{evolve, pso_baseline, GaConfig, GaProblem, SearchOutcome};
use cmcs_core::graph::{Recruiter, RelationModel, SocialGraph};

use crate::data::Dataset;
use crate::error::{BenchError, Result};

/// Which embedding feeds the clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Embedding {
    EdgeOnly,
    EdgeAttribute,
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Embedding::EdgeOnly => "edge-only",
            Embedding::EdgeAttribute => "edge-attribute",
        })
    }
}

impl FromStr for Embedding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge-only" => Ok(Embedding::EdgeOnly),
            "edge-attribute" => Ok(Embedding::EdgeAttribute),
            _ => Err(format!("unknown embedding {s:?} (expected edge-only or edge-attribute)")),
        }
    }
}

/// Search method run on the reduced pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    Ga,
    Pso,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub edge_k: usize,
    pub attr_k: usize,
    pub edge_train: TrainConfig,
    pub attr_train: TrainConfig,
    /// Reduction applied before k-means; `None` clusters the raw vectors.
    pub reduce: Option<ReduceMethod>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            edge_k: 25,
            attr_k: 36,
            edge_train: TrainConfig::default(),
            attr_train: TrainConfig::attributed(),
            reduce: Some(ReduceMethod::Tsne),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn k(&self, kind: Embedding) -> usize {
        match kind {
            Embedding::EdgeOnly => self.edge_k,
            Embedding::EdgeAttribute => self.attr_k,
        }
    }
}

/// Full-dimensional embedding of every node.
pub fn embed(g: &SocialGraph, workers: &[Worker], kind: Embedding, cfg: &PipelineConfig) -> Result<EmbeddingMatrix> {
    Ok(match kind {
        Embedding::EdgeOnly => {
            let train = TrainConfig { seed: cfg.seed, ..cfg.edge_train.clone() };
            train_skipgram(&generate_walks(g, &train)?, &train)?.embedding
        }
        Embedding::EdgeAttribute => {
            let train = TrainConfig { seed: cfg.seed, ..cfg.attr_train.clone() };
            embed_attributed(g, workers, &train)?
        }
    })
}

/// Optional 2-D reduction followed by k-means.
pub fn cluster_embedding(e: &EmbeddingMatrix, k: usize, reduce: Option<ReduceMethod>, seed: u64) -> Result<ClusterAssignment> {
    let points = match reduce {
        Some(method) => reduce_dim(e, 2, method, seed)?,
        None => e.clone(),
    };
    Ok(kmeans(&points, k, seed)?)
}

/// Clusterings of the whole population under both embeddings.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub edge: ClusterAssignment,
    pub attr: ClusterAssignment,
}

impl Artifacts {
    pub fn get(&self, kind: Embedding) -> &ClusterAssignment {
        match kind {
            Embedding::EdgeOnly => &self.edge,
            Embedding::EdgeAttribute => &self.attr,
        }
    }
}

pub fn build_artifacts(ds: &Dataset, cfg: &PipelineConfig) -> Result<Artifacts> {
    let run = |kind| -> Result<ClusterAssignment> {
        let e = embed(&ds.graph, &ds.workers, kind, cfg)?;
        cluster_embedding(&e, cfg.k(kind), cfg.reduce, cfg.seed)
    };
    Ok(Artifacts {
        edge: run(Embedding::EdgeOnly)?,
        attr: run(Embedding::EdgeAttribute)?,
    })
}

/// Normalizers shared by both strategies on one worker sample: `S̄ = R̄ = 1`,
/// `Ū = σ0²` (the largest possible variance) and `C̄` the largest true cost.
pub fn harness_weights(eta: [f64; 4], workers: &[Worker], model: &UncertaintyModel) -> Result<ObjectiveWeights> {
    let guard = |x: f64| if x > 0.0 { x } else { 1.0 };
    let cost = workers.iter().flat_map(|w| w.costs.iter().copied()).fold(0.0, f64::max);
    let norm = Normalizers {
        skill: 1.0,
        uncertainty: guard(model.sigma0 * model.sigma0),
        cost: guard(cost),
        relation: 1.0,
    };
    Ok(ObjectiveWeights::new(eta, norm)?)
}

/// Exact recruitment of `workers` (aligned with `relations`).
pub fn solve_exact(
    workers: &[Worker],
    relations: &RelationModel,
    project: &Project,
    weights: &ObjectiveWeights,
    model: &UncertaintyModel,
    solver: &SolverConfig,
    seed: u64,
) -> Result<(Team, RecruiterView)> {
    let platform = perceive_skills(workers, relations, Recruiter::Platform, model, seed)?;
    match solver.strategy {
        Strategy::Platform => {
            let team = solve_platform(&platform, project, weights, solver)?;
            Ok((team, platform))
        }
        Strategy::Leader => {
            let view_for = |i: usize| perceive_skills(workers, relations, Recruiter::Worker(workers[i].id), model, seed);
            let team = solve_leader(workers.len(), project, view_for, weights, solver)?;
            let leader = team.leader.expect("leader strategy names a leader");
            let view = perceive_skills(workers, relations, Recruiter::Worker(leader), model, seed)?;
            Ok((team, view))
        }
    }
}

/// Cluster selection, pool reduction and the heuristic search. `clusters`
/// may cover more workers than `view`; it is restricted first.
pub fn recruit_heuristic(
    view: &RecruiterView,
    project: &Project,
    weights: &ObjectiveWeights,
    clusters: &ClusterAssignment,
    kind: Embedding,
    heuristic: Heuristic,
    ga: &GaConfig,
) -> Result<SearchOutcome> {
    let local = if clusters.ids == view.ids { clusters.clone() } else { clusters.restrict(&view.ids)? };
    let selection = match kind {
        Embedding::EdgeOnly => Selection::EdgeOnly(score_clusters_edge_only(&local, project, view, weights)?),
        Embedding::EdgeAttribute => Selection::EdgeAttribute(assign_skill_clusters(&local, project, view)?),
    };
    let pool = candidate_pool(&local, &selection)?;
    let problem = GaProblem { view, project, weights, pool: &pool };
    match heuristic {
        Heuristic::Ga => Ok(evolve(&problem, ga)?),
        Heuristic::Pso => Ok(pso_baseline(&problem, ga)?),
    }
}

/// Whether the heuristics can run on this sample: some cluster of the
/// edge-only clustering holds a whole team and the edge-attribute
/// clustering has at least one non-empty cluster per required skill.
pub fn admissible(sample_ids: &[u64], artifacts: &Artifacts, project: &Project) -> Result<bool> {
    let k = project.team_size();
    let edge = artifacts.edge.restrict(sample_ids)?;
    let attr = artifacts.attr.restrict(sample_ids)?;
    let edge_ok = edge.sizes().iter().any(|&s| s >= k);
    let attr_ok = attr.sizes().iter().filter(|&&s| s > 0).count() >= k;
    Ok(edge_ok && attr_ok)
}

const EDGE_FILE: &str = "edge_clusters.csv";
const ATTR_FILE: &str = "attr_clusters.csv";
const KEY_FILE: &str = "key";

fn artifact_key(ds: &Dataset, cfg: &PipelineConfig) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(ds.hash.as_bytes());
    h.update(format!("{cfg:?}").as_bytes());
    hex::encode(h.finalize())
}

/// Clusterings cached under `dir`, rebuilt when the dataset or the
/// configuration changed.
pub fn load_or_build_artifacts(ds: &Dataset, cfg: &PipelineConfig, dir: &Path) -> Result<Artifacts> {
    let key = artifact_key(ds, cfg);
    let read = |name: &str| -> Result<ClusterAssignment> {
        let p = dir.join(name);
        let f = File::open(&p).map_err(|e| BenchError::io(&p, e))?;
        Ok(ClusterAssignment::read_csv(f, &p)?)
    };
    if std::fs::read_to_string(dir.join(KEY_FILE)).is_ok_and(|k| k.trim() == key) {
        return Ok(Artifacts { edge: read(EDGE_FILE)?, attr: read(ATTR_FILE)? });
    }
    let artifacts = build_artifacts(ds, cfg)?;
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    for (name, c) in [(EDGE_FILE, &artifacts.edge), (ATTR_FILE, &artifacts.attr)] {
        let p = dir.join(name);
        c.write_csv(File::create(&p).map_err(|e| BenchError::io(&p, e))?)?;
    }
    std::fs::write(dir.join(KEY_FILE), key).map_err(|e| BenchError::io(dir, e))?;
    Ok(artifacts)
}
