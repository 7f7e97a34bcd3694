// SPDX-License-Identifier: Apache-2.0

//! Attributed embedding: a structural skip-gram block concatenated with a
//! learned linear projection of worker attributes.

use rand::Rng;

use super::skipgram::{sweep, PairModel};
use super::{dot, generate_walks, neg_log_sigmoid, sigmoid, train_skipgram, worker_features, EmbeddingMatrix, TrainConfig};
use crate::domain::Worker;
use crate::graph::SocialGraph;
use crate::seed::{self, tag};
use crate::{Error, Result};

/// Attribute vector of every worker: skills followed by costs divided by
/// the largest cost.
pub fn attribute_matrix(workers: &[Worker]) -> Vec<Vec<f64>> {
    worker_features(workers)
}

/// Trains the projection `P` and attribute context vectors with the
/// structural block frozen.
struct Projection<'a> {
    s: &'a [f64],
    cs: &'a [f64],
    ds: usize,
    x: &'a [Vec<f64>],
    f: usize,
    da: usize,
    /// Row-major `[da][f]`.
    p: Vec<f64>,
    ca: Vec<f64>,
    px: Vec<f64>,
    grad_px: Vec<f64>,
}

impl Projection<'_> {
    fn project(&mut self, u: usize) {
        for r in 0..self.da {
            self.px[r] = dot(&self.p[r * self.f..(r + 1) * self.f], &self.x[u]);
        }
    }
}

impl PairModel for Projection<'_> {
    fn step(&mut self, u: usize, v: usize, negatives: &[usize], lr: f64) -> f64 {
        let (ds, da) = (self.ds, self.da);
        self.project(u);
        self.grad_px.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (t, label) in std::iter::once((v, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0))) {
            let score = dot(&self.s[u * ds..(u + 1) * ds], &self.cs[t * ds..(t + 1) * ds])
                + dot(&self.px, &self.ca[t * da..(t + 1) * da]);
            loss += if label == 1.0 { neg_log_sigmoid(score) } else { neg_log_sigmoid(-score) };
            let g = lr * (label - sigmoid(score));
            for r in 0..da {
                self.grad_px[r] += g * self.ca[t * da + r];
                self.ca[t * da + r] += g * self.px[r];
            }
        }
        for r in 0..da {
            let gr = self.grad_px[r];
            if gr != 0.0 {
                for (pj, xj) in self.p[r * self.f..(r + 1) * self.f].iter_mut().zip(&self.x[u]) {
                    *pj += gr * xj;
                }
            }
        }
        loss
    }
}

/// `z_u = [z_struct_u ; P·x_u]` with `cfg.dim / 2` structural dimensions.
///
/// The structural block is exactly the edge-only embedding of that size and
/// seed; `P` is then trained with the same co-occurrence loss on the
/// concatenated representation.
pub fn embed_attributed(g: &SocialGraph, workers: &[Worker], cfg: &TrainConfig) -> Result<EmbeddingMatrix> {
    cfg.validate()?;
    for (i, &id) in g.node_ids().iter().enumerate() {
        if workers.get(i).is_none_or(|w| w.id != id) {
            return Err(Error::MissingAttributes(id));
        }
    }
    if workers.len() != g.num_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "{} workers for {} nodes",
            workers.len(),
            g.num_nodes()
        )));
    }
    let ds = cfg.dim / 2;
    let da = cfg.dim - ds;
    let struct_cfg = TrainConfig { dim: ds.max(2), ..cfg.clone() };
    let ds = struct_cfg.dim;
    let corpus = generate_walks(g, &struct_cfg)?;
    let structural = train_skipgram(&corpus, &struct_cfg)?;

    let x = worker_features(workers);
    let f = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != f) {
        return Err(Error::DimensionMismatch("ragged attribute vectors".into()));
    }
    let mut rng = seed::rng(cfg.seed, &[tag::TRAIN, 1, u64::MAX]);
    let scale = 1.0 / (da as f64 * f.max(1) as f64).sqrt();
    let mut model = Projection {
        s: &structural.embedding.data,
        cs: &structural.context,
        ds,
        x: &x,
        f,
        da,
        p: (0..da * f).map(|_| (rng.random::<f64>() - 0.5) * scale).collect(),
        ca: vec![0.0; g.num_nodes() * da],
        px: vec![0.0; da],
        grad_px: vec![0.0; da],
    };
    sweep(&corpus, cfg, &mut model, 1)?;

    let mut data = Vec::with_capacity(g.num_nodes() * (ds + da));
    for u in 0..g.num_nodes() {
        data.extend_from_slice(structural.embedding.row(u));
        model.project(u);
        data.extend_from_slice(&model.px);
    }
    EmbeddingMatrix::new(g.node_ids().to_vec(), ds + da, data)
}
