// SPDX-License-Identifier: Apache-2.0

//! Clustering of embedded workers and reduction to a candidate pool.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::domain::{efficiency, ObjectiveWeights, Project, RecruiterView, SkillId};
use crate::embed::EmbeddingMatrix;
use crate::graph::SocialGraph;
use crate::seed::{self, tag};
use crate::{Error, Result};

pub const MAX_LLOYD_ITERATIONS: usize = 300;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

/// Cluster label per node. Empty clusters keep their last centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub ids: Vec<u64>,
    pub labels: Vec<usize>,
    pub k: usize,
    pub dim: usize,
    /// Row-major `[cluster][dim]`; empty when the assignment was not
    /// produced by k-means.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    /// Inertia after every Lloyd iteration.
    pub inertia_trace: Vec<f64>,
}

impl ClusterAssignment {
    /// An assignment given directly by labels.
    pub fn from_labels(ids: Vec<u64>, labels: Vec<usize>, k: usize) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!("{} ids, {} labels", ids.len(), labels.len())));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!("label {l} outside [0, {k})")));
        }
        Ok(Self {
            ids,
            labels,
            k,
            dim: 0,
            centroids: Vec::new(),
            inertia: 0.0,
            inertia_trace: Vec::new(),
        })
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Members of every cluster, in node order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            m[l].push(i);
        }
        m
    }

    /// The same clustering seen on `ids` only (labels in `ids` order).
    pub fn restrict(&self, ids: &[u64]) -> Result<Self> {
        let index: std::collections::HashMap<u64, usize> =
            self.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let labels = ids
            .iter()
            .map(|id| {
                index
                    .get(id)
                    .map(|&i| self.labels[i])
                    .ok_or_else(|| Error::InvalidArgument(format!("node {id} is not clustered")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ids: ids.to_vec(),
            labels,
            inertia_trace: Vec::new(),
            ..self.clone()
        })
    }

    /// Writes `node_id,cluster`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
        wr.write_record(["node_id", "cluster"]).map_err(csv_err)?;
        for (id, l) in self.ids.iter().zip(&self.labels) {
            wr.write_record([id.to_string(), l.to_string()]).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::io("<cluster csv>", e))
    }

    /// Reads `node_id,cluster`; `k` is one more than the largest label.
    pub fn read_csv<R: Read>(input: R, source: &Path) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let parse_err = |line: usize, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != ["node_id", "cluster"] {
            return Err(parse_err(1, "expected header node_id,cluster".into()));
        }
        let (mut ids, mut labels) = (Vec::new(), Vec::new());
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| parse_err(i + 2, e.to_string()))?;
            let num = |j: usize| {
                rec[j]
                    .parse::<u64>()
                    .map_err(|_| parse_err(i + 2, format!("bad integer {:?}", &rec[j])))
            };
            ids.push(num(0)?);
            labels.push(num(1)? as usize);
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        Self::from_labels(ids, labels, k)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid (lowest index on ties) and its squared distance.
fn nearest(x: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.chunks(dim).enumerate() {
        let d = sq_dist(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means with k-means++ seeding and Lloyd iterations until the relative
/// inertia change drops below [`RELATIVE_TOLERANCE`] or
/// [`MAX_LLOYD_ITERATIONS`] is reached.
pub fn kmeans(e: &EmbeddingMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = e.len();
    let dim = e.dim;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let mut rng = seed::rng(seed, &[tag::KMEANS]);
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(e.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(e.row(i), e.row(first))).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && r < d {
                    chosen = i;
                    break;
                }
                r -= d;
            }
            // Guard against rounding landing on an already-chosen point.
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = e.row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(e.row(i), &c));
        }
        centroids.extend_from_slice(&c);
    }

    let mut labels = vec![0; n];
    let mut trace = Vec::new();
    let mut prev = f64::INFINITY;
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let assigned: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|i| nearest(e.row(i), &centroids, dim))
            .collect();
        let inertia: f64 = assigned.iter().map(|a| a.1).sum();
        for (l, a) in labels.iter_mut().zip(&assigned) {
            *l = a.0;
        }
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(e.row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..dim {
                    centroids[c * dim + j] = sums[c * dim + j] / counts[c] as f64;
                }
            }
        }
        let settled: f64 = (0..n).map(|i| sq_dist(e.row(i), &centroids[labels[i] * dim..(labels[i] + 1) * dim])).sum();
        trace.push(settled);
        let done = prev.is_finite() && (prev - settled).abs() <= RELATIVE_TOLERANCE * prev.max(f64::MIN_POSITIVE);
        prev = settled;
        if done || settled == 0.0 || inertia == 0.0 {
            break;
        }
    }
    Ok(ClusterAssignment {
        ids: e.ids.clone(),
        labels,
        k,
        dim,
        centroids,
        inertia: prev,
        inertia_trace: trace,
    })
}

/// Newman modularity `Σ_c [e_c/m − (d_c/2m)²]` of the partition over `g`,
/// whose node order must match the assignment.
pub fn modularity(g: &SocialGraph, c: &ClusterAssignment) -> Result<f64> {
    if c.labels.len() != g.num_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} nodes",
            c.labels.len(),
            g.num_nodes()
        )));
    }
    let m = g.num_edges() as f64;
    if m == 0.0 {
        return Ok(0.0);
    }
    let mut internal = vec![0.0; c.k];
    let mut degree = vec![0.0; c.k];
    for i in 0..g.num_nodes() {
        degree[c.labels[i]] += g.degree(i) as f64;
    }
    for (a, b) in g.edges() {
        if c.labels[a] == c.labels[b] {
            internal[c.labels[a]] += 1.0;
        }
    }
    Ok((0..c.k)
        .map(|l| internal[l] / m - (degree[l] / (2.0 * m)).powi(2))
        .sum())
}

/// Average team efficiency of every cluster, `None` for clusters smaller
/// than the project's team. `c` must be aligned with `view`.
pub fn cluster_scores(
    c: &ClusterAssignment,
    project: &Project,
    view: &RecruiterView,
    weights: &ObjectiveWeights,
) -> Result<Vec<Option<f64>>> {
    if c.ids != view.ids {
        return Err(Error::DimensionMismatch("clusters and view list different workers".into()));
    }
    let skills = project.required_skills();
    let members = c.members();
    Ok(members
        .par_iter()
        .map(|m| {
            if m.is_empty() || m.len() < skills.len() {
                return None;
            }
            let total: f64 = m
                .iter()
                .flat_map(|&w| skills.iter().map(move |&k| (w, k)))
                .map(|(w, k)| efficiency(w, k, m, view, weights))
                .sum();
            Some(total / m.len() as f64)
        })
        .collect())
}

/// `c*`: the cluster with the best average efficiency over its members and
/// the required skills, among clusters with at least `|S_p|` members. The
/// relation term of each member is taken against its cluster co-members.
/// Ties go to the lowest cluster index.
pub fn score_clusters_edge_only(
    c: &ClusterAssignment,
    project: &Project,
    view: &RecruiterView,
    weights: &ObjectiveWeights,
) -> Result<usize> {
    let scores = cluster_scores(c, project, view, weights)?;
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    match best {
        Some((i, _)) => Ok(i),
        None if c.sizes().iter().all(|&s| s == 0) => Err(Error::NoClusters),
        None => Err(Error::PoolShape {
            clusters: c.sizes().iter().filter(|&&s| s > 0).count(),
            skills: project.team_size(),
        }),
    }
}

/// Representative cluster of every required skill: the non-empty cluster
/// with the highest mean perceived skill. Skills are placed greedily, the
/// one whose best cluster leads its runner-up by the widest margin first,
/// and each cluster takes at most one skill.
pub fn assign_skill_clusters(
    c: &ClusterAssignment,
    project: &Project,
    view: &RecruiterView,
) -> Result<Vec<(SkillId, usize)>> {
    if c.ids != view.ids {
        return Err(Error::DimensionMismatch("clusters and view list different workers".into()));
    }
    let skills = project.required_skills();
    let members = c.members();
    let nonempty: Vec<usize> = (0..c.k).filter(|&l| !members[l].is_empty()).collect();
    if nonempty.len() < skills.len() {
        return Err(Error::PoolShape {
            clusters: nonempty.len(),
            skills: skills.len(),
        });
    }
    let mean = |l: usize, k: SkillId| {
        members[l].iter().map(|&w| view.skill(w, k)).sum::<f64>() / members[l].len() as f64
    };
    let means: Vec<Vec<f64>> = skills
        .iter()
        .map(|&k| (0..c.k).map(|l| if members[l].is_empty() { f64::NAN } else { mean(l, k) }).collect())
        .collect();
    let mut taken = vec![false; c.k];
    let mut result: Vec<Option<usize>> = vec![None; skills.len()];
    for _ in 0..skills.len() {
        // (skill slot, best cluster, margin)
        let mut pick: Option<(usize, usize, f64)> = None;
        for (s, row) in means.iter().enumerate() {
            if result[s].is_some() {
                continue;
            }
            let mut first: Option<(usize, f64)> = None;
            let mut second = f64::NEG_INFINITY;
            for &l in nonempty.iter().filter(|&&l| !taken[l]) {
                let v = row[l];
                match first {
                    Some((_, b)) if v <= b => second = second.max(v),
                    _ => {
                        if let Some((_, b)) = first {
                            second = second.max(b);
                        }
                        first = Some((l, v));
                    }
                }
            }
            let (l, v) = first.expect("enough non-empty clusters");
            let margin = v - second;
            if pick.is_none_or(|(_, _, m)| margin > m) {
                pick = Some((s, l, margin));
            }
        }
        let (s, l, _) = pick.expect("an unassigned skill remains");
        result[s] = Some(l);
        taken[l] = true;
    }
    Ok(skills
        .into_iter()
        .zip(result)
        .map(|(k, l)| (k, l.expect("every skill assigned")))
        .collect())
}

/// How the pool was selected.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    EdgeOnly(usize),
    EdgeAttribute(Vec<(SkillId, usize)>),
}

/// Reduced pool over view positions. With skill tags, `tags[i]` is the only
/// skill `members[i]` may take.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub members: Vec<usize>,
    pub tags: Option<Vec<SkillId>>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether member `i` (pool index) may take skill `k`.
    pub fn eligible(&self, i: usize, k: SkillId) -> bool {
        self.tags.as_ref().is_none_or(|t| t[i] == k)
    }
}

pub fn candidate_pool(c: &ClusterAssignment, selection: &Selection) -> Result<CandidatePool> {
    let members = c.members();
    let pool = match selection {
        Selection::EdgeOnly(l) => CandidatePool {
            members: members.get(*l).cloned().unwrap_or_default(),
            tags: None,
        },
        Selection::EdgeAttribute(map) => {
            let mut tagged: Vec<(usize, SkillId)> = map
                .iter()
                .flat_map(|&(k, l)| members.get(l).into_iter().flatten().map(move |&w| (w, k)))
                .collect();
            tagged.sort_unstable();
            tagged.dedup_by_key(|t| t.0);
            CandidatePool {
                members: tagged.iter().map(|t| t.0).collect(),
                tags: Some(tagged.iter().map(|t| t.1).collect()),
            }
        }
    };
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(pool)
}

/// Writes the score report `cluster,score,size`; clusters without a score
/// have an empty score field.
pub fn write_scores_csv<W: Write>(out: W, scores: &[Option<f64>], sizes: &[usize]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    wr.write_record(["cluster", "score", "size"]).map_err(csv_err)?;
    for (i, (s, n)) in scores.iter().zip(sizes).enumerate() {
        let score = s.map(|v| v.to_string()).unwrap_or_default();
        wr.write_record([i.to_string(), score, n.to_string()]).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<score csv>", e))
}
