// SPDX-License-Identifier: Apache-2.0

//! Skip-gram with negative sampling over a walk corpus.

use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;

use super::{dot, neg_log_sigmoid, sigmoid, EmbeddingMatrix, TrainConfig, WalkCorpus};
use crate::cluster::kmeans;
use crate::seed::{self, tag};
use crate::{Error, Result};

/// Negative-sampling noise: node frequency raised to the distortion power.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    probabilities: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl NoiseDistribution {
    pub fn new(counts: &[u64], distortion: f64) -> Result<Self> {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { (c as f64).powf(distortion) })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptyCorpus);
        }
        let alias = WeightedAliasIndex::new(weights.clone()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self {
            probabilities: weights.iter().map(|w| w / total).collect(),
            alias,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }
}

/// One trainable model driven by the shared corpus sweep.
pub(crate) trait PairModel {
    /// Called before every epoch.
    fn epoch_start(&mut self, _epoch: usize) -> Result<()> {
        Ok(())
    }

    /// SGD step for center `u`, positive context `v` and `negatives`;
    /// returns the loss before the step.
    fn step(&mut self, u: usize, v: usize, negatives: &[usize], lr: f64) -> f64;

    /// Extra per-center work (e.g. a penalty step); returns its loss.
    fn center_done(&mut self, _u: usize, _lr: f64) -> f64 {
        0.0
    }
}

/// Runs `cfg.epochs` passes over `corpus`; returns the mean loss per
/// training pair for every epoch.
pub(crate) fn sweep<M: PairModel>(corpus: &WalkCorpus, cfg: &TrainConfig, model: &mut M, stream: u64) -> Result<Vec<f64>> {
    let noise = NoiseDistribution::new(&corpus.counts(), cfg.distortion)?;
    let tokens = corpus.tokens();
    let total = (tokens * cfg.epochs).max(1) as f64;
    let mut done = 0usize;
    let mut lr = cfg.learning_rate;
    let mut negatives = Vec::with_capacity(cfg.negative_samples);
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        model.epoch_start(epoch)?;
        let mut rng: ChaCha8Rng = seed::rng(cfg.seed, &[tag::TRAIN, stream, epoch as u64]);
        let mut loss = 0.0;
        let mut pairs = 0usize;
        for walk in &corpus.walks {
            for (i, &u) in walk.iter().enumerate() {
                if done % cfg.batch_size == 0 {
                    let progress = done as f64 / total;
                    lr = (cfg.learning_rate - (cfg.learning_rate - cfg.min_learning_rate) * progress)
                        .max(cfg.min_learning_rate);
                }
                done += 1;
                let b = rng.random_range(1..=cfg.window.max(1));
                let lo = i.saturating_sub(b);
                let hi = (i + b).min(walk.len() - 1);
                for (j, &v) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negatives.clear();
                    while negatives.len() < cfg.negative_samples {
                        let n = noise.sample(&mut rng);
                        if n != v {
                            negatives.push(n);
                        } else if noise.probabilities()[v] >= 1.0 {
                            break;
                        }
                    }
                    loss += model.step(u, v, &negatives, lr);
                    pairs += 1;
                }
                loss += model.center_done(u, lr);
            }
        }
        losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }
    Ok(losses)
}

/// Output of [`train_skipgram`].
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub embedding: EmbeddingMatrix,
    /// Context ("output") vectors, row-major like the embedding.
    pub context: Vec<f64>,
    /// Mean surrogate loss per training pair, one entry per epoch.
    pub epoch_loss: Vec<f64>,
}

pub(crate) struct SkipGram {
    pub dim: usize,
    pub z: Vec<f64>,
    pub c: Vec<f64>,
    grad: Vec<f64>,
    gamma: f64,
    penalty_clusters: usize,
    seed: u64,
    ids: Vec<u64>,
    /// Centroid of each node's cluster under the penalty.
    anchor: Vec<f64>,
}

/// Small random rows with norm at most 1.
pub(crate) fn init_rows(n: usize, dim: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed, &[tag::TRAIN, stream, u64::MAX]);
    let mut z: Vec<f64> = (0..n * dim).map(|_| (rng.random::<f64>() - 0.5) / dim as f64).collect();
    for row in z.chunks_mut(dim) {
        let norm = dot(row, row).sqrt();
        if norm > 1.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    z
}

impl SkipGram {
    pub(crate) fn new(corpus: &WalkCorpus, cfg: &TrainConfig, stream: u64) -> Self {
        let n = corpus.num_nodes;
        Self {
            dim: cfg.dim,
            z: init_rows(n, cfg.dim, cfg.seed, stream),
            c: vec![0.0; n * cfg.dim],
            grad: vec![0.0; cfg.dim],
            gamma: cfg.gamma,
            penalty_clusters: cfg.penalty_clusters.clamp(1, n.max(1)),
            seed: cfg.seed,
            ids: corpus.ids.clone(),
            anchor: Vec::new(),
        }
    }
}

impl PairModel for SkipGram {
    fn epoch_start(&mut self, epoch: usize) -> Result<()> {
        if self.gamma > 0.0 {
            let e = EmbeddingMatrix::new(self.ids.clone(), self.dim, self.z.clone())?;
            let c = kmeans(&e, self.penalty_clusters, seed::derive(self.seed, &[tag::TRAIN, epoch as u64]))?;
            self.anchor = c
                .labels
                .iter()
                .flat_map(|&l| c.centroid(l).to_vec())
                .collect();
        }
        Ok(())
    }

    fn step(&mut self, u: usize, v: usize, negatives: &[usize], lr: f64) -> f64 {
        let d = self.dim;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let zu = u * d;
        let mut loss = 0.0;
        for (target, label) in std::iter::once((v, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0))) {
            let ct = target * d;
            let score = dot(&self.z[zu..zu + d], &self.c[ct..ct + d]);
            loss += if label == 1.0 { neg_log_sigmoid(score) } else { neg_log_sigmoid(-score) };
            let g = lr * (label - sigmoid(score));
            for k in 0..d {
                self.grad[k] += g * self.c[ct + k];
                self.c[ct + k] += g * self.z[zu + k];
            }
        }
        for k in 0..d {
            self.z[zu + k] += self.grad[k];
        }
        loss
    }

    fn center_done(&mut self, u: usize, lr: f64) -> f64 {
        if self.gamma == 0.0 {
            return 0.0;
        }
        let d = self.dim;
        let mut sq = 0.0;
        for k in 0..d {
            let diff = self.z[u * d + k] - self.anchor[u * d + k];
            sq += diff * diff;
            self.z[u * d + k] -= lr * 2.0 * self.gamma * diff;
        }
        self.gamma * sq
    }
}

/// Trains node vectors of dimension `cfg.dim` on `corpus`. Single-threaded
/// and bit-reproducible for a fixed seed.
pub fn train_skipgram(corpus: &WalkCorpus, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if corpus.walks.is_empty() || corpus.num_nodes == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut model = SkipGram::new(corpus, cfg, 0);
    let epoch_loss = sweep(corpus, cfg, &mut model, 0)?;
    Ok(TrainReport {
        embedding: EmbeddingMatrix::new(corpus.ids.clone(), cfg.dim, model.z)?,
        context: model.c,
        epoch_loss,
    })
}
