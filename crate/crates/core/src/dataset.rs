// SPDX-License-Identifier: Apache-2.0

//! Semi-synthetic worker attributes on top of a social graph.
//!
//! Each worker gets one job category. The category's primary skill is drawn
//! from a high range and every other skill from a disjoint low range, so the
//! argmax skill always identifies the category. Costs scale with skill.

use std::collections::{BTreeMap, VecDeque};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::{SkillCatalog, SkillId, Worker};
use crate::graph::SocialGraph;
use crate::seed::{self, tag};
use crate::{Error, Result};

pub const EGO_FACEBOOK_NODES: usize = 4039;
pub const EGO_FACEBOOK_EDGES: usize = 88234;

/// Default job categories; each names its own primary skill.
pub const DEFAULT_SKILLS: [&str; 10] = [
    "doctor",
    "nurse",
    "firefighter",
    "it_engineer",
    "mechanical_engineer",
    "photographer",
    "salesman",
    "teacher",
    "driver",
    "lawyer",
];

const DEFAULT_COST_BASE: [f64; 10] = [20.0, 12.0, 14.0, 16.0, 15.0, 8.0, 7.0, 10.0, 6.0, 18.0];

/// Availability window given to every synthesized worker.
pub const DEFAULT_WINDOW: (i64, i64) = (0, 3650);

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub seed: u64,
    pub catalog: SkillCatalog,
    /// Category name to its primary skill.
    pub primary: BTreeMap<String, SkillId>,
    pub primary_range: (f64, f64),
    pub off_range: (f64, f64),
    /// Cost per unit of skill, one entry per catalog skill.
    pub cost_base: Vec<f64>,
    pub cost_noise_sigma: f64,
    /// Inclusive tenure range in days.
    pub tenure_range: (u32, u32),
}

impl SynthesisConfig {
    pub fn with_seed(seed: u64) -> Self {
        let catalog = SkillCatalog::new(DEFAULT_SKILLS).expect("default catalog is valid");
        let primary = DEFAULT_SKILLS
            .iter()
            .enumerate()
            .map(|(k, name)| (name.to_string(), k))
            .collect();
        Self {
            seed,
            catalog,
            primary,
            primary_range: (0.7, 1.0),
            off_range: (0.0, 0.3),
            cost_base: DEFAULT_COST_BASE.to_vec(),
            cost_noise_sigma: 0.1,
            tenure_range: (0, 3650),
        }
    }

    pub fn categories(&self) -> Vec<String> {
        self.primary.keys().cloned().collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("synthesis config: {m}")));
        let unit = |r: (f64, f64)| 0.0 <= r.0 && r.0 <= r.1 && r.1 <= 1.0;
        if !unit(self.primary_range) || !unit(self.off_range) {
            return bad("skill ranges must lie within [0, 1]");
        }
        if self.cost_base.len() != self.catalog.len() {
            return bad("one cost base per skill is required");
        }
        if self.cost_base.iter().any(|&b| !(b > 0.0)) {
            return bad("cost base must be positive");
        }
        if !(self.cost_noise_sigma >= 0.0) {
            return bad("cost noise sigma must be non-negative");
        }
        if self.tenure_range.0 > self.tenure_range.1 {
            return bad("empty tenure range");
        }
        if self.primary.values().any(|&k| k >= self.catalog.len()) {
            return bad("primary skill outside the catalog");
        }
        Ok(())
    }
}

/// Draws attributes for every node of `g`. `categories[i]` labels node `i`.
pub fn synthesize_attributes(g: &SocialGraph, categories: &[String], cfg: &SynthesisConfig) -> Result<Vec<Worker>> {
    cfg.validate()?;
    if categories.len() != g.num_nodes() {
        let missing = g.node_ids().get(categories.len()).copied().unwrap_or_default();
        return Err(Error::Unlabeled(missing));
    }
    let noise = Normal::new(0.0, cfg.cost_noise_sigma).expect("sigma validated");
    let num_skills = cfg.catalog.len();
    g.node_ids()
        .iter()
        .zip(categories)
        .map(|(&id, category)| {
            let &primary = cfg
                .primary
                .get(category)
                .ok_or_else(|| Error::InvalidArgument(format!("node {id}: unknown category {category:?}")))?;
            let mut rng = seed::rng(cfg.seed, &[tag::SYNTH, id]);
            let skills: Vec<f64> = (0..num_skills)
                .map(|k| {
                    let (lo, hi) = if k == primary { cfg.primary_range } else { cfg.off_range };
                    lo + (hi - lo) * rng.random::<f64>()
                })
                .collect();
            let costs = skills
                .iter()
                .zip(&cfg.cost_base)
                .map(|(s, base)| (base * s * (1.0 + noise.sample(&mut rng))).max(0.0))
                .collect();
            Ok(Worker {
                id,
                job_category: category.clone(),
                tenure_days: rng.random_range(cfg.tenure_range.0..=cfg.tenure_range.1),
                enter: DEFAULT_WINDOW.0,
                leave: DEFAULT_WINDOW.1,
                skills,
                costs,
            })
        })
        .collect()
}

/// Maps raw (anonymized) categories to job categories; nodes without a raw
/// category, or with an unmapped one, get `default`.
pub fn label_categories(
    node_ids: &[u64],
    raw: &BTreeMap<u64, String>,
    mapping: &BTreeMap<String, String>,
    default: &str,
) -> Vec<String> {
    node_ids
        .iter()
        .map(|id| {
            raw.get(id)
                .and_then(|r| mapping.get(r))
                .cloned()
                .unwrap_or_else(|| default.to_string())
        })
        .collect()
}

/// Raw categories `cat0..cat{n-1}` laid out as graph regions: seeded
/// multi-source BFS grows `regions_per_category` regions per category, then
/// a `scatter` fraction of nodes is relabeled uniformly at random.
pub fn regional_raw_categories(
    g: &SocialGraph,
    num_categories: usize,
    regions_per_category: usize,
    scatter: f64,
    seed: u64,
) -> BTreeMap<u64, String> {
    let n = g.num_nodes();
    let mut rng = seed::rng(seed, &[tag::SYNTH, 0xCA7]);
    let mut label = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for (r, &node) in order.iter().take(num_categories * regions_per_category).enumerate() {
        label[node] = r % num_categories;
        queue.push_back(node);
    }
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if label[v] == usize::MAX {
                label[v] = label[u];
                queue.push_back(v);
            }
        }
    }
    for l in label.iter_mut() {
        if *l == usize::MAX || rng.random::<f64>() < scatter {
            *l = rng.random_range(0..num_categories);
        }
    }
    g.node_ids()
        .iter()
        .zip(label)
        .map(|(&id, l)| (id, format!("cat{l}")))
        .collect()
}

/// The default `cat{i}` → category-name bijection.
pub fn default_mapping(names: &[String]) -> BTreeMap<String, String> {
    names
        .iter()
        .enumerate()
        .map(|(i, name)| (format!("cat{i}"), name.clone()))
        .collect()
}

/// Reads `node_id,category`.
pub fn read_category_csv<R: Read>(input: R, source: &Path) -> Result<BTreeMap<u64, String>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["node_id", "category"] {
        return Err(parse_err(1, "expected header node_id,category".into()));
    }
    let mut out = BTreeMap::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(i + 2, e.to_string()))?;
        let id = rec[0]
            .parse::<u64>()
            .map_err(|_| parse_err(i + 2, format!("bad node id {:?}", &rec[0])))?;
        out.insert(id, rec[1].to_string());
    }
    Ok(out)
}

pub fn write_category_csv<W: Write>(out: W, node_ids: &[u64], categories: &[String]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    wr.write_record(["node_id", "category"]).map_err(csv_err)?;
    for (id, c) in node_ids.iter().zip(categories) {
        wr.write_record([id.to_string(), c.clone()]).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<category csv>", e))
}

/// Parameters of the planted-community stand-in graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoLikeConfig {
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    /// Probability that an edge stays inside its source's community.
    pub intra: f64,
    pub seed: u64,
}

impl Default for EgoLikeConfig {
    fn default() -> Self {
        Self {
            nodes: EGO_FACEBOOK_NODES,
            edges: EGO_FACEBOOK_EDGES,
            communities: 40,
            intra: 0.9,
            seed: 0,
        }
    }
}

/// Community-structured graph with exactly `cfg.edges` edges and ids
/// `0..nodes`. Community sizes are heavy-tailed; an edge picks a uniform
/// source, then a partner in the same community with probability `intra`
/// and anywhere otherwise.
pub fn ego_like_graph(cfg: &EgoLikeConfig) -> Result<SocialGraph> {
    let n = cfg.nodes;
    let max_edges = n * n.saturating_sub(1) / 2;
    if cfg.communities == 0 || cfg.communities > n || cfg.edges > max_edges / 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot plant {} communities with {} edges on {n} nodes",
            cfg.communities, cfg.edges
        )));
    }
    let mut rng = seed::rng(cfg.seed, &[tag::SYNTH, 0xE60]);
    // Heavy-tailed community sizes, each at least 2.
    let weights: Vec<f64> = (0..cfg.communities).map(|_| 1.0 / rng.random_range(0.05f64..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut sizes: Vec<usize> = weights
        .iter()
        .map(|w| ((w / total) * (n - 2 * cfg.communities) as f64).floor() as usize + 2)
        .collect();
    let mut assigned: usize = sizes.iter().sum();
    let mut c = 0;
    while assigned < n {
        sizes[c % cfg.communities] += 1;
        assigned += 1;
        c += 1;
    }
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let mut members = Vec::with_capacity(cfg.communities);
    let mut community = vec![0usize; n];
    let mut start = 0;
    for (ci, &s) in sizes.iter().enumerate() {
        let block = nodes[start..start + s].to_vec();
        for &v in &block {
            community[v] = ci;
        }
        members.push(block);
        start += s;
    }
    let mut seen = std::collections::HashSet::with_capacity(cfg.edges * 2);
    let mut edges = Vec::with_capacity(cfg.edges);
    let mut attempts = 0usize;
    while edges.len() < cfg.edges {
        attempts += 1;
        if attempts > cfg.edges * 1000 {
            return Err(Error::InvalidArgument("edge target unreachable".into()));
        }
        let u = rng.random_range(0..n);
        let v = if rng.random::<f64>() < cfg.intra {
            let block = &members[community[u]];
            block[rng.random_range(0..block.len())]
        } else {
            rng.random_range(0..n)
        };
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Ok(SocialGraph::from_index_edges((0..n as u64).collect(), &edges))
}
