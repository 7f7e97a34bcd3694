// SPDX-License-Identifier: Apache-2.0

//! Dataset preparation: the ego-Facebook graph (or a planted-community
//! stand-in of the same size) with synthesized worker attributes.

use std::path::{Path, PathBuf};

use cmcs_core::dataset::{
    default_mapping, ego_like_graph, label_categories, regional_raw_categories, synthesize_attributes, EgoLikeConfig,
    SynthesisConfig, DEFAULT_SKILLS, EGO_FACEBOOK_EDGES, EGO_FACEBOOK_NODES,
};
use cmcs_core::domain::{write_workers_csv, SkillCatalog, Worker};
use cmcs_core::graph::{load_edge_list, SocialGraph};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

/// Environment variable naming the ego-Facebook edge list.
pub const DATA_ENV: &str = "CMCS_EGO_FACEBOOK";
/// Fallback location, relative to the working directory.
pub const DEFAULT_DATA_PATH: &str = "data/facebook_combined.txt";

/// Regions grown per job category when labelling nodes.
const REGIONS_PER_CATEGORY: usize = 4;
/// Fraction of nodes relabelled uniformly after region growth.
const CATEGORY_SCATTER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    EgoFacebook(PathBuf),
    /// Any other edge list.
    EdgeList(PathBuf),
    Synthetic { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: SocialGraph,
    /// Aligned with `graph.node_ids()`.
    pub workers: Vec<Worker>,
    pub catalog: SkillCatalog,
    pub origin: Origin,
    /// Hex SHA-256 of the graph and the attribute table.
    pub hash: String,
}

/// Where the ego-Facebook edge list is expected.
pub fn ego_facebook_path() -> PathBuf {
    std::env::var_os(DATA_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_PATH))
}

/// Loads the edge list and checks the published node and edge counts.
pub fn load_ego_facebook(path: &Path) -> Result<SocialGraph> {
    if !path.exists() {
        return Err(BenchError::DatasetMissing(path.to_path_buf()));
    }
    let g = load_edge_list(path)?;
    if g.num_nodes() != EGO_FACEBOOK_NODES || g.num_edges() != EGO_FACEBOOK_EDGES {
        return Err(cmcs_core::Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "expected {EGO_FACEBOOK_NODES} nodes and {EGO_FACEBOOK_EDGES} edges, found {} and {}",
                g.num_nodes(),
                g.num_edges()
            ),
        }
        .into());
    }
    Ok(g)
}

/// Labels every node with a job category and synthesizes its attributes.
pub fn build_dataset(graph: SocialGraph, origin: Origin, seed: u64) -> Result<Dataset> {
    let cfg = SynthesisConfig::with_seed(seed);
    let names = cfg.catalog.names().to_vec();
    let raw = regional_raw_categories(&graph, names.len(), REGIONS_PER_CATEGORY, CATEGORY_SCATTER, seed);
    let labels = label_categories(graph.node_ids(), &raw, &default_mapping(&names), &names[0]);
    let workers = synthesize_attributes(&graph, &labels, &cfg)?;
    let hash = dataset_hash(&graph, &workers, cfg.catalog.len())?;
    Ok(Dataset {
        graph,
        workers,
        catalog: cfg.catalog,
        origin,
        hash,
    })
}

/// The planted-community stand-in with the ego-Facebook node and edge counts.
pub fn synthetic_dataset(seed: u64) -> Result<Dataset> {
    let g = ego_like_graph(&EgoLikeConfig { seed, ..EgoLikeConfig::default() })?;
    build_dataset(g, Origin::Synthetic { seed }, seed)
}

/// The real dataset when present, else the stand-in.
pub fn load_or_synthesize(seed: u64) -> Result<Dataset> {
    match load_ego_facebook(&ego_facebook_path()) {
        Ok(g) => build_dataset(g, Origin::EgoFacebook(ego_facebook_path()), seed),
        Err(BenchError::DatasetMissing(_)) => synthetic_dataset(seed),
        Err(e) => Err(e),
    }
}

fn dataset_hash(g: &SocialGraph, workers: &[Worker], num_skills: usize) -> Result<String> {
    let mut h = Sha256::new();
    h.update(g.content_hash());
    let mut table = Vec::new();
    write_workers_csv(&mut table, workers, num_skills)?;
    h.update(&table);
    Ok(hex::encode(h.finalize()))
}

/// Pairs `graph` with an existing attribute table, reordered to the
/// graph's node order.
pub fn with_workers(graph: SocialGraph, origin: Origin, workers: Vec<Worker>, num_skills: usize) -> Result<Dataset> {
    let mut by_id: std::collections::HashMap<u64, Worker> = workers.into_iter().map(|w| (w.id, w)).collect();
    let workers = graph
        .node_ids()
        .iter()
        .map(|&id| by_id.remove(&id).ok_or(cmcs_core::Error::MissingAttributes(id)))
        .collect::<Result<Vec<_>, _>>()?;
    let catalog = if num_skills == DEFAULT_SKILLS.len() {
        SkillCatalog::new(DEFAULT_SKILLS)?
    } else {
        SkillCatalog::numbered(num_skills)
    };
    let hash = dataset_hash(&graph, &workers, num_skills)?;
    Ok(Dataset { graph, workers, catalog, origin, hash })
}

impl Dataset {
    /// Workers at the given graph indices.
    pub fn workers_at(&self, nodes: &[usize]) -> Vec<Worker> {
        nodes.iter().map(|&i| self.workers[i].clone()).collect()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.origin, Origin::EgoFacebook(_))
    }
}
