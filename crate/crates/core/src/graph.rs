// SPDX-License-Identifier: Apache-2.0

//! Social network model: edge-list ingest, all-pairs hop counts, true and
//! perceived relationship weights, and density-controlled subsampling.

use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::seed::{self, tag};
use crate::{Error, Result};

/// Undirected simple graph over worker identifiers.
///
/// Nodes are stored in ascending id order; `adjacency[i]` is the sorted list
/// of neighbour indices of node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    node_ids: Vec<u64>,
    index: HashMap<u64, usize>,
    adjacency: Vec<Vec<usize>>,
    num_edges: usize,
}

impl SocialGraph {
    /// Builds a graph from id pairs. Self-loops are dropped (their endpoint
    /// is kept as a node) and duplicate or reversed pairs collapse to one
    /// undirected edge.
    pub fn from_id_pairs(pairs: &[(u64, u64)]) -> Self {
        let mut ids: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut graph = Self::with_nodes(ids);
        for &(a, b) in pairs {
            let (i, j) = (graph.index[&a], graph.index[&b]);
            graph.add_edge(i, j);
        }
        graph.finish();
        graph
    }

    /// Builds a graph on `node_ids` (any order, duplicates removed) with
    /// edges given as node-index pairs into the sorted id list.
    pub fn from_index_edges(node_ids: Vec<u64>, edges: &[(usize, usize)]) -> Self {
        let mut graph = Self::with_nodes(node_ids);
        for &(i, j) in edges {
            graph.add_edge(i, j);
        }
        graph.finish();
        graph
    }

    /// Edgeless graph on the given ids.
    pub fn with_nodes(mut node_ids: Vec<u64>) -> Self {
        node_ids.sort_unstable();
        node_ids.dedup();
        let index = node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let n = node_ids.len();
        Self {
            node_ids,
            index,
            adjacency: vec![Vec::new(); n],
            num_edges: 0,
        }
    }

    fn add_edge(&mut self, i: usize, j: usize) {
        if i != j {
            self.adjacency[i].push(j);
            self.adjacency[j].push(i);
        }
    }

    fn finish(&mut self) {
        for list in &mut self.adjacency {
            list.sort_unstable();
            list.dedup();
        }
        self.num_edges = self.adjacency.iter().map(Vec::len).sum::<usize>() / 2;
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn node_ids(&self) -> &[u64] {
        &self.node_ids
    }

    pub fn id(&self, i: usize) -> u64 {
        self.node_ids[i]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Undirected edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Subgraph induced by the given node indices.
    pub fn induced(&self, nodes: &[usize]) -> SocialGraph {
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let local: HashMap<usize, usize> = sorted.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let ids = sorted.iter().map(|&g| self.node_ids[g]).collect();
        let mut edges = Vec::new();
        for (l, &g) in sorted.iter().enumerate() {
            for &nb in &self.adjacency[g] {
                if let Some(&m) = local.get(&nb) {
                    if m > l {
                        edges.push((l, m));
                    }
                }
            }
        }
        SocialGraph::from_index_edges(ids, &edges)
    }

    /// SHA-256 over the canonical edge list; keys the hop-matrix cache.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update((self.num_nodes() as u64).to_le_bytes());
        for &id in &self.node_ids {
            hasher.update(id.to_le_bytes());
        }
        for (i, j) in self.edges() {
            hasher.update((i as u64).to_le_bytes());
            hasher.update((j as u64).to_le_bytes());
        }
        hasher.finalize().into()
    }

    /// Edge density `m / (n(n-1)/2)`.
    pub fn density(&self) -> f64 {
        let n = self.num_nodes() as f64;
        if n < 2.0 {
            0.0
        } else {
            self.num_edges as f64 / (n * (n - 1.0) / 2.0)
        }
    }
}

/// Reads a whitespace-separated `u v` edge list. Lines starting with `#`
/// and blank lines are skipped.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SocialGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), path)
}

pub fn parse_edge_list<R: BufRead>(reader: R, path: &Path) -> Result<SocialGraph> {
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut fields = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(format!("missing {what} node id")))?;
            tok.parse::<u64>()
                .map_err(|_| parse_err(format!("invalid {what} node id {tok:?}")))
        };
        let u = next_id("source")?;
        let v = next_id("target")?;
        if let Some(extra) = fields.next() {
            return Err(parse_err(format!("unexpected trailing field {extra:?}")));
        }
        pairs.push((u, v));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyGraph(path.to_path_buf()));
    }
    Ok(SocialGraph::from_id_pairs(&pairs))
}

/// All-pairs shortest hop counts, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopMatrix {
    n: usize,
    hops: Vec<u32>,
}

impl HopMatrix {
    pub const UNREACHABLE: u32 = u32::MAX;
    const MAGIC: &'static [u8; 8] = b"CMCSHOP1";

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.hops[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.hops[i * self.n..(i + 1) * self.n]
    }

    /// Writes the cache sidecar: magic, node count, graph hash, then
    /// row-major little-endian `u32` hops.
    pub fn write_cache(&self, path: impl AsRef<Path>, graph_hash: &[u8; 32]) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::with_capacity(48 + self.hops.len() * 4);
        buf.extend_from_slice(Self::MAGIC);
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        buf.extend_from_slice(graph_hash);
        for &h in &self.hops {
            buf.extend_from_slice(&h.to_le_bytes());
        }
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a sidecar; returns `Ok(None)` when it was written for another
    /// graph.
    pub fn read_cache(path: impl AsRef<Path>, graph_hash: &[u8; 32]) -> Result<Option<Self>> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let bad = |message: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: message.to_string(),
        };
        if bytes.len() < 48 || &bytes[..8] != Self::MAGIC {
            return Err(bad("not a hop-matrix cache"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if &bytes[16..48] != graph_hash {
            return Ok(None);
        }
        if bytes.len() != 48 + n * n * 4 {
            return Err(bad("truncated hop-matrix cache"));
        }
        let hops = bytes[48..]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Some(Self { n, hops }))
    }

    /// Loads the sidecar when it matches `graph`, otherwise computes the
    /// matrix and rewrites the sidecar.
    pub fn load_or_compute(graph: &SocialGraph, sidecar: impl AsRef<Path>) -> Result<Self> {
        let sidecar = sidecar.as_ref();
        let hash = graph.content_hash();
        if sidecar.exists() {
            if let Ok(Some(m)) = Self::read_cache(sidecar, &hash) {
                if m.n == graph.num_nodes() {
                    return Ok(m);
                }
            }
        }
        let m = all_pairs_hops(graph);
        m.write_cache(sidecar, &hash)?;
        Ok(m)
    }
}

/// Hop counts from `source` by breadth-first search.
pub fn bfs_hops(graph: &SocialGraph, source: usize) -> Vec<u32> {
    let mut dist = vec![HopMatrix::UNREACHABLE; graph.num_nodes()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in graph.neighbors(u) {
            if dist[v] == HopMatrix::UNREACHABLE {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Exact all-pairs hop counts (one BFS per source, run in parallel).
pub fn all_pairs_hops(graph: &SocialGraph) -> HopMatrix {
    let n = graph.num_nodes();
    let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| bfs_hops(graph, s)).collect();
    HopMatrix {
        n,
        hops: rows.concat(),
    }
}

/// How directly connected pairs are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectWeight {
    /// Adjacent workers get weight 1; `1/(1+hops)` applies from two hops on.
    #[default]
    One,
    /// `1/(1+hops)` everywhere, so adjacent pairs get 0.5.
    Formula,
}

#[inline]
pub fn relation_weight(hops: u32, direct: DirectWeight) -> f64 {
    match hops {
        HopMatrix::UNREACHABLE => 0.0,
        1 if direct == DirectWeight::One => 1.0,
        h => 1.0 / (1.0 + h as f64),
    }
}

/// True relationship weights `R` between every pair of workers.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationModel {
    ids: Vec<u64>,
    weights: Vec<f64>,
}

impl RelationModel {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.ids.len() + j]
    }

    /// Restriction to the given indices (in that order).
    pub fn restrict(&self, nodes: &[usize]) -> RelationModel {
        let n = nodes.len();
        let mut weights = vec![0.0; n * n];
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                weights[a * n + b] = self.get(i, j);
            }
        }
        RelationModel {
            ids: nodes.iter().map(|&i| self.ids[i]).collect(),
            weights,
        }
    }
}

/// Weights from a hop matrix; the diagonal is left at 0 and never read.
pub fn relation_weights(graph: &SocialGraph, hops: &HopMatrix, direct: DirectWeight) -> RelationModel {
    let n = hops.len();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                weights[i * n + j] = relation_weight(hops.get(i, j), direct);
            }
        }
    }
    RelationModel {
        ids: graph.node_ids().to_vec(),
        weights,
    }
}

/// Weights among `nodes` only, measured in the whole graph: one BFS per
/// listed node instead of all pairs. Equal to restricting
/// [`relation_weights`] to `nodes`.
pub fn relations_among(graph: &SocialGraph, nodes: &[usize], direct: DirectWeight) -> RelationModel {
    let n = nodes.len();
    let rows: Vec<Vec<u32>> = nodes.par_iter().map(|&s| bfs_hops(graph, s)).collect();
    let mut weights = vec![0.0; n * n];
    for (a, row) in rows.iter().enumerate() {
        for (b, &j) in nodes.iter().enumerate() {
            if a != b {
                weights[a * n + b] = relation_weight(row[j], direct);
            }
        }
    }
    RelationModel {
        ids: nodes.iter().map(|&i| graph.id(i)).collect(),
        weights,
    }
}

/// Who forms the team: the platform or a worker acting as leader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Recruiter {
    Platform,
    Worker(u64),
}

impl Recruiter {
    /// Key used to derive the recruiter's noise streams.
    pub fn stream_key(self) -> u64 {
        match self {
            Recruiter::Platform => u64::MAX,
            Recruiter::Worker(id) => id,
        }
    }
}

/// A recruiter's noisy perception `R̂` of the relations in a worker set.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedRelation {
    pub recruiter: Recruiter,
    n: usize,
    weights: Vec<f64>,
}

impl PerceivedRelation {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Perception from an explicit row-major `n × n` matrix.
    pub fn from_matrix(recruiter: Recruiter, n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} relation weights for {n} workers",
                weights.len()
            )));
        }
        Ok(Self {
            recruiter,
            n,
            weights,
        })
    }

    /// Noise-free perception (`R̂ = R`).
    pub fn exact(recruiter: Recruiter, r: &RelationModel) -> Self {
        Self {
            recruiter,
            n: r.len(),
            weights: r.weights.clone(),
        }
    }
}

/// One relation-noise draw `σ_w · N(0,1)` per (recruiter, worker).
pub fn relation_noise(recruiter: Recruiter, worker_id: u64, sigma: f64, seed: u64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mut rng = seed::rng(seed, &[tag::RELATION_NOISE, recruiter.stream_key(), worker_id]);
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

/// `R̂_ww' = clamp(R_ww' + (ñ_w + ñ_w')/2, 0, 1)` where `ñ_w` has standard
/// deviation `sigma[w]`. When `recruiter` is a worker it must belong to the
/// relation model.
pub fn perceive_relations(
    r: &RelationModel,
    sigma: &[f64],
    recruiter: Recruiter,
    seed: u64,
) -> Result<PerceivedRelation> {
    if let Recruiter::Worker(id) = recruiter {
        if !r.ids.contains(&id) {
            return Err(Error::UnknownRecruiter(id));
        }
    }
    if sigma.len() != r.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} noise levels for {} workers",
            sigma.len(),
            r.len()
        )));
    }
    let n = r.len();
    let noise: Vec<f64> = r
        .ids
        .iter()
        .zip(sigma)
        .map(|(&id, &s)| relation_noise(recruiter, id, s, seed))
        .collect();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                weights[i * n + j] = (r.get(i, j) + 0.5 * (noise[i] + noise[j])).clamp(0.0, 1.0);
            }
        }
    }
    Ok(PerceivedRelation {
        recruiter,
        n,
        weights,
    })
}

/// Samples `n` nodes uniformly, takes the induced subgraph, then adds
/// (uniformly among absent pairs) or removes (uniformly among present
/// pairs) edges until it has exactly `round(target_density · n(n-1)/2)`.
pub fn sample_subpopulation(
    graph: &SocialGraph,
    n: usize,
    target_density: f64,
    seed: u64,
) -> Result<SocialGraph> {
    if n > graph.num_nodes() {
        return Err(Error::PopulationTooSmall {
            requested: n,
            available: graph.num_nodes(),
        });
    }
    if !(0.0..=1.0).contains(&target_density) {
        return Err(Error::InvalidArgument(format!(
            "density {target_density} outside [0, 1]"
        )));
    }
    let mut rng = seed::rng(seed, &[tag::SUBSAMPLE]);
    let nodes = index::sample(&mut rng, graph.num_nodes(), n).into_vec();
    let induced = graph.induced(&nodes);
    let pairs = n * n.saturating_sub(1) / 2;
    let target = (target_density * pairs as f64).round() as usize;

    let mut present = Vec::new();
    let mut absent = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if induced.has_edge(i, j) {
                present.push((i, j));
            } else {
                absent.push((i, j));
            }
        }
    }
    let edges = if present.len() < target {
        absent.shuffle(&mut rng);
        present.extend_from_slice(&absent[..target - present.len()]);
        present
    } else {
        present.shuffle(&mut rng);
        present.truncate(target);
        present
    };
    Ok(SocialGraph::from_index_edges(induced.node_ids().to_vec(), &edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    fn triangle() -> SocialGraph {
        SocialGraph::from_id_pairs(&[(0, 1), (1, 2), (2, 0)])
    }

    fn floyd_warshall(g: &SocialGraph) -> Vec<Vec<u64>> {
        let n = g.num_nodes();
        let inf = u64::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
        }
        for (i, j) in g.edges() {
            d[i][j] = 1;
            d[j][i] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> SocialGraph {
        let mut rng = seed::rng(seed, &[]);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        SocialGraph::from_index_edges((0..n as u64).collect(), &edges)
    }

    #[test]
    fn parses_triangle() {
        let text = "# comment\n0 1\n1 2\n\n2 0\n";
        let g = parse_edge_list(text.as_bytes(), Path::new("t")).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 3);
    }

    #[test]
    fn duplicate_and_reversed_edges_collapse() {
        let g = parse_edge_list("0 1\n1 0\n0 1\n".as_bytes(), Path::new("t")).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
    }

    #[test]
    fn self_loop_dropped_but_node_kept() {
        let g = parse_edge_list("0 1\n5 5\n".as_bytes(), Path::new("t")).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degree(g.index_of(5).unwrap()), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_edge_list("0 1\n2 x\n".as_bytes(), Path::new("e.txt")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_edge_list("0 1 2\n".as_bytes(), Path::new("e.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = parse_edge_list("# only comments\n".as_bytes(), Path::new("e")).unwrap_err();
        assert!(matches!(err, Error::EmptyGraph(_)));
    }

    #[test]
    fn hop_examples() {
        let h = all_pairs_hops(&triangle());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.get(i, j), u32::from(i != j));
            }
        }
        let path = SocialGraph::from_id_pairs(&[(0, 1), (1, 2)]);
        assert_eq!(all_pairs_hops(&path).get(0, 2), 2);
        let two = SocialGraph::from_id_pairs(&[(0, 1), (2, 3)]);
        let h = all_pairs_hops(&two);
        assert_eq!(h.get(0, 2), HopMatrix::UNREACHABLE);
        assert_eq!(h.get(3, 1), HopMatrix::UNREACHABLE);
    }

    #[test]
    fn relation_examples() {
        assert_eq!(relation_weight(1, DirectWeight::One), 1.0);
        assert_eq!(relation_weight(1, DirectWeight::Formula), 0.5);
        assert_eq!(relation_weight(3, DirectWeight::One), 0.25);
        assert_eq!(relation_weight(HopMatrix::UNREACHABLE, DirectWeight::One), 0.0);
    }

    #[test]
    fn relations_match_independent_bfs_exhaustively() {
        for seed in 0..6 {
            let g = random_graph(50, 0.05, seed);
            let h = all_pairs_hops(&g);
            let r = relation_weights(&g, &h, DirectWeight::One);
            let fw = floyd_warshall(&g);
            for i in 0..50 {
                for j in 0..50 {
                    if i == j {
                        continue;
                    }
                    let expected = match fw[i][j] {
                        1 => 1.0,
                        d if d > 1000 => 0.0,
                        d => 1.0 / (1.0 + d as f64),
                    };
                    assert_eq!(r.get(i, j), expected);
                }
            }
        }
    }

    #[test]
    fn zero_sigma_perception_is_exact() {
        let g = random_graph(20, 0.2, 3);
        let r = relation_weights(&g, &all_pairs_hops(&g), DirectWeight::One);
        let p = perceive_relations(&r, &[0.0; 20], Recruiter::Platform, 9).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                if i != j {
                    assert_eq!(p.get(i, j), r.get(i, j));
                }
            }
        }
    }

    #[test]
    fn perception_is_deterministic_and_checks_recruiter() {
        let g = random_graph(20, 0.2, 4);
        let r = relation_weights(&g, &all_pairs_hops(&g), DirectWeight::One);
        let sigma = vec![0.3; 20];
        let a = perceive_relations(&r, &sigma, Recruiter::Worker(5), 11).unwrap();
        let b = perceive_relations(&r, &sigma, Recruiter::Worker(5), 11).unwrap();
        assert_eq!(a, b);
        let c = perceive_relations(&r, &sigma, Recruiter::Worker(6), 11).unwrap();
        assert_ne!(a, c);
        assert!(matches!(
            perceive_relations(&r, &sigma, Recruiter::Worker(99), 11),
            Err(Error::UnknownRecruiter(99))
        ));
    }

    /// `E|(n1+n2)/2|` for independent `N(0, 0.3²)` draws is
    /// `0.3/√2 · √(2/π) ≈ 0.16926`; a 10⁶-sample Monte-Carlo run of the
    /// same expression gave 0.16912.
    #[test]
    fn perceived_relation_noise_magnitude() {
        let n = 200;
        let ids: Vec<u64> = (0..n as u64).collect();
        let r = RelationModel {
            ids: ids.clone(),
            weights: vec![0.5; n * n],
        };
        // Pairs share per-worker draws, so average over many seeds.
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..20 {
            let p = perceive_relations(&r, &vec![0.3; n], Recruiter::Platform, seed).unwrap();
            for i in 0..n {
                for j in i + 1..n {
                    total += (p.get(i, j) - 0.5).abs();
                    count += 1;
                }
            }
        }
        let mean = total / count as f64;
        let expected = 0.3 / 2f64.sqrt() * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean - expected).abs() / expected < 0.03, "mean {mean} vs {expected}");
    }

    #[test]
    fn relations_among_matches_restriction() {
        let g = random_graph(40, 0.06, 9);
        let nodes = [7, 3, 22, 39, 0, 15];
        for direct in [DirectWeight::One, DirectWeight::Formula] {
            let full = relation_weights(&g, &all_pairs_hops(&g), direct).restrict(&nodes);
            assert_eq!(relations_among(&g, &nodes, direct), full);
        }
    }

    #[test]
    fn subpopulation_edge_counts() {
        let g = random_graph(60, 0.1, 1);
        let full = sample_subpopulation(&g, 14, 1.0, 5).unwrap();
        assert_eq!(full.num_edges(), 91);
        let empty = sample_subpopulation(&g, 14, 0.0, 5).unwrap();
        assert_eq!(empty.num_edges(), 0);
        assert_eq!(empty.num_nodes(), 14);
        let half = sample_subpopulation(&g, 28, 0.5, 5).unwrap();
        assert_eq!(half.num_edges(), 189);
        assert!(matches!(
            sample_subpopulation(&g, 61, 0.5, 5),
            Err(Error::PopulationTooSmall { .. })
        ));
    }

    #[test]
    fn hop_cache_roundtrip_and_key_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hops.bin");
        let g = random_graph(30, 0.1, 8);
        let h = HopMatrix::load_or_compute(&g, &path).unwrap();
        assert_eq!(h, all_pairs_hops(&g));
        assert_eq!(HopMatrix::read_cache(&path, &g.content_hash()).unwrap(), Some(h));
        let other = random_graph(30, 0.1, 9);
        assert_eq!(HopMatrix::read_cache(&path, &other.content_hash()).unwrap(), None);
        let h2 = HopMatrix::load_or_compute(&other, &path).unwrap();
        assert_eq!(h2, all_pairs_hops(&other));
    }

    proptest! {
        #[test]
        fn bfs_equals_floyd_warshall(n in 2usize..30, p in 0.0f64..0.4, seed in any::<u64>()) {
            let g = random_graph(n, p, seed);
            let h = all_pairs_hops(&g);
            let fw = floyd_warshall(&g);
            for i in 0..n {
                for j in 0..n {
                    let expected = if fw[i][j] > 1000 { HopMatrix::UNREACHABLE } else { fw[i][j] as u32 };
                    prop_assert_eq!(h.get(i, j), expected);
                }
            }
        }

        #[test]
        fn hop_matrix_is_a_metric(n in 2usize..25, p in 0.0f64..0.5, seed in any::<u64>()) {
            let g = random_graph(n, p, seed);
            let h = all_pairs_hops(&g);
            for i in 0..n {
                prop_assert_eq!(h.get(i, i), 0);
                for j in 0..n {
                    prop_assert_eq!(h.get(i, j), h.get(j, i));
                    prop_assert_eq!(h.get(i, j) == 1, g.has_edge(i, j));
                    for k in 0..n {
                        let (a, b) = (h.get(i, k), h.get(k, j));
                        if a != HopMatrix::UNREACHABLE && b != HopMatrix::UNREACHABLE {
                            prop_assert!(h.get(i, j) <= a + b);
                        }
                    }
                }
            }
        }

        #[test]
        fn subpopulation_hits_exact_count(n in 2usize..25, d in 0.0f64..=1.0, seed in any::<u64>()) {
            let g = random_graph(40, 0.15, seed ^ 1);
            let s = sample_subpopulation(&g, n, d, seed).unwrap();
            let target = (d * (n * (n - 1) / 2) as f64).round() as usize;
            prop_assert_eq!(s.num_edges(), target);
            prop_assert_eq!(s.edges().count(), target);
            prop_assert_eq!(s.num_nodes(), n);
        }
    }
}
