// SPDX-License-Identifier: Apache-2.0

//! Worker embeddings: random-walk skip-gram (edge-only), its attributed
//! extension, a mean-aggregation GNN encoder, and dimensionality reduction.

use std::io::{Read, Write};
use std::path::Path;

use crate::domain::Worker;
use crate::{Error, Result};

mod attributed;
mod gnn;
mod reduce;
mod skipgram;
mod walks;

pub use attributed::{attribute_matrix, embed_attributed};
pub use gnn::{gnn_encode, gnn_gradients, gnn_loss, Activation, GnnGradients, GnnParams};
pub use reduce::{pca, reduce_dim, tsne, ReduceMethod, TsneConfig};
pub use skipgram::{train_skipgram, NoiseDistribution, TrainReport};
pub use walks::{generate_walks, WalkCorpus};

/// Dense per-node vectors, rows in graph index order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub ids: Vec<u64>,
    pub dim: usize,
    /// Row-major `[node][dim]`.
    pub data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(ids: Vec<u64>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} rows of dimension {dim}",
                data.len(),
                ids.len()
            )));
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite embedding entry {x}")));
        }
        Ok(Self { ids, dim, data })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dot(&self, a: usize, b: usize) -> f64 {
        dot(self.row(a), self.row(b))
    }

    /// Rows `nodes`, in that order.
    pub fn select(&self, nodes: &[usize]) -> EmbeddingMatrix {
        let mut data = Vec::with_capacity(nodes.len() * self.dim);
        for &i in nodes {
            data.extend_from_slice(self.row(i));
        }
        EmbeddingMatrix {
            ids: nodes.iter().map(|&i| self.ids[i]).collect(),
            dim: self.dim,
            data,
        }
    }

    /// Writes `node_id,z_0,...,z_{d-1}` with round-trip precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
        let mut header = vec!["node_id".to_string()];
        header.extend((0..self.dim).map(|k| format!("z_{k}")));
        wr.write_record(&header).map_err(csv_err)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.to_string()];
            row.extend(self.row(i).iter().map(|x| x.to_string()));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush().map_err(|e| Error::io("<embedding csv>", e))
    }

    pub fn read_csv<R: Read>(input: R, source: &Path) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let parse_err = |line: usize, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        let dim = header.len().saturating_sub(1);
        let expected = (0..dim).map(|k| format!("z_{k}"));
        if header.get(0) != Some("node_id") || dim == 0 || !header.iter().skip(1).eq(expected) {
            return Err(parse_err(1, "expected header node_id,z_0,...".into()));
        }
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
            ids.push(
                rec[0]
                    .parse::<u64>()
                    .map_err(|_| parse_err(line, format!("bad node id {:?}", &rec[0])))?,
            );
            for f in rec.iter().skip(1) {
                data.push(f.parse::<f64>().map_err(|_| parse_err(line, format!("bad number {f:?}")))?);
            }
        }
        Self::new(ids, dim, data)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    /// Center tokens between learning-rate updates.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// The learning rate decays linearly to this value.
    pub min_learning_rate: f64,
    pub negative_samples: usize,
    pub window: usize,
    pub distortion: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    /// Weight of the clustering penalty `Σ_u min_c ‖z_u − μ_c‖²`; 0 disables it.
    pub gamma: f64,
    /// Centroid count for the clustering penalty.
    pub penalty_clusters: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 23,
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            negative_samples: 5,
            window: 5,
            distortion: 0.75,
            walk_length: 80,
            walks_per_node: 5,
            p: 1.0,
            q: 1.0,
            gamma: 0.0,
            penalty_clusters: 25,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Defaults for the attributed embedder (48 dimensions).
    pub fn attributed() -> Self {
        Self {
            dim: 48,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("train config: {m}")));
        if self.dim < 2 {
            return bad("dim must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.distortion) {
            return bad("distortion must lie in [0, 1]");
        }
        if !(self.p > 0.0 && self.q > 0.0) {
            return bad("p and q must be positive");
        }
        if self.walk_length == 0 || self.walks_per_node == 0 || self.batch_size == 0 {
            return bad("walk length, walks per node and batch size must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.min_learning_rate >= 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.gamma >= 0.0) {
            return bad("gamma must be non-negative");
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(x)`, stable for large `|x|`.
#[inline]
pub(crate) fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Per-node feature vectors: skills followed by costs scaled by the largest
/// cost in `workers`.
pub(crate) fn worker_features(workers: &[Worker]) -> Vec<Vec<f64>> {
    let max_cost = workers
        .iter()
        .flat_map(|w| w.costs.iter().copied())
        .fold(0.0, f64::max);
    let scale = if max_cost > 0.0 { 1.0 / max_cost } else { 1.0 };
    workers
        .iter()
        .map(|w| w.skills.iter().copied().chain(w.costs.iter().map(|c| c * scale)).collect())
        .collect()
}
