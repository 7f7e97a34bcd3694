// SPDX-License-Identifier: Apache-2.0

//! Mean-aggregation graph neural network encoder,
//! `h_u^k = σ(W_k · mean_{a∈N(u)} h_a^{k−1} + B_k · h_u^{k−1})`, trained with
//! the negative-sampling co-occurrence loss on `z = h^K`.

use rand::Rng;

use super::skipgram::NoiseDistribution;
use super::{dot, generate_walks, neg_log_sigmoid, sigmoid, worker_features, EmbeddingMatrix, TrainConfig};
use crate::domain::Worker;
use crate::graph::SocialGraph;
use crate::seed::{self, tag};
use crate::{Error, Result};

/// Gradient steps per epoch.
pub const STEPS_PER_EPOCH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, a: f64) -> f64 {
        match self {
            Activation::Identity => a,
            Activation::Tanh => a.tanh(),
            Activation::Relu => a.max(0.0),
        }
    }

    /// Derivative at pre-activation `a`, given the output `h`.
    fn derivative(self, a: f64, h: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - h * h,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Per-layer `W_k`, `B_k` (row-major `[out][in]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    pub dims: Vec<usize>,
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub activation: Activation,
}

impl GnnParams {
    /// Glorot-uniform weights for the layer widths `dims` (input first).
    pub fn new(dims: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidArgument("a GNN needs at least one layer of positive width".into()));
        }
        let mut rng = seed::rng(seed, &[tag::TRAIN, 0x6E6E]);
        let mut w = Vec::new();
        let mut b = Vec::new();
        for pair in dims.windows(2) {
            let limit = (6.0 / (pair[0] + pair[1]) as f64).sqrt();
            let mut draw = || (0..pair[0] * pair[1]).map(|_| rng.random_range(-limit..limit)).collect::<Vec<_>>();
            w.push(draw());
            b.push(draw());
        }
        Ok(Self {
            dims: dims.to_vec(),
            w,
            b,
            activation,
        })
    }

    /// One layer with `W = 0`, `B = I` and identity activation.
    pub fn identity(dim: usize) -> Self {
        let mut eye = vec![0.0; dim * dim];
        for i in 0..dim {
            eye[i * dim + i] = 1.0;
        }
        Self {
            dims: vec![dim, dim],
            w: vec![vec![0.0; dim * dim]],
            b: vec![eye],
            activation: Activation::Identity,
        }
    }

    pub fn layers(&self) -> usize {
        self.w.len()
    }

    fn check(&self, g: &SocialGraph, x: &[f64]) -> Result<()> {
        if self.dims.len() != self.w.len() + 1 || self.w.len() != self.b.len() {
            return Err(Error::DimensionMismatch("layer count disagrees with widths".into()));
        }
        for k in 0..self.layers() {
            let want = self.dims[k] * self.dims[k + 1];
            if self.w[k].len() != want || self.b[k].len() != want {
                return Err(Error::DimensionMismatch(format!("layer {k} weights do not chain")));
            }
        }
        if x.len() != g.num_nodes() * self.dims[0] {
            return Err(Error::DimensionMismatch(format!(
                "features of width {} expected for {} nodes",
                self.dims[0],
                g.num_nodes()
            )));
        }
        Ok(())
    }

    /// Forward pass over flat row-major features; returns every layer's
    /// neighbor means, pre-activations and outputs.
    fn forward_all(&self, g: &SocialGraph, x: &[f64]) -> Forward {
        let n = g.num_nodes();
        let mut h = vec![x.to_vec()];
        let mut m = Vec::new();
        let mut a = Vec::new();
        for k in 0..self.layers() {
            let (din, dout) = (self.dims[k], self.dims[k + 1]);
            let prev = &h[k];
            let mut mean = vec![0.0; n * din];
            for u in 0..n {
                let nbrs = g.neighbors(u);
                if nbrs.is_empty() {
                    continue;
                }
                let row = &mut mean[u * din..(u + 1) * din];
                for &v in nbrs {
                    for (r, p) in row.iter_mut().zip(&prev[v * din..(v + 1) * din]) {
                        *r += p;
                    }
                }
                let inv = 1.0 / nbrs.len() as f64;
                row.iter_mut().for_each(|r| *r *= inv);
            }
            let mut pre = vec![0.0; n * dout];
            for u in 0..n {
                let mu = &mean[u * din..(u + 1) * din];
                let hu = &prev[u * din..(u + 1) * din];
                for o in 0..dout {
                    pre[u * dout + o] = dot(&self.w[k][o * din..(o + 1) * din], mu)
                        + dot(&self.b[k][o * din..(o + 1) * din], hu);
                }
            }
            let out: Vec<f64> = pre.iter().map(|&v| self.activation.apply(v)).collect();
            m.push(mean);
            a.push(pre);
            h.push(out);
        }
        Forward { h, m, a }
    }

    /// Output `h^K` for row-major features `x`.
    pub fn forward(&self, g: &SocialGraph, x: &[f64]) -> Result<Vec<f64>> {
        self.check(g, x)?;
        Ok(self.forward_all(g, x).h.pop().expect("at least the input layer"))
    }
}

struct Forward {
    h: Vec<Vec<f64>>,
    m: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnGradients {
    pub loss: f64,
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

/// Mean negative-sampling loss of positive pairs `pos` and noise pairs
/// `neg` over `z = h^K`.
pub fn gnn_loss(
    params: &GnnParams,
    g: &SocialGraph,
    x: &[f64],
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
) -> Result<f64> {
    let z = params.forward(g, x)?;
    let d = *params.dims.last().unwrap();
    let row = |u: usize| &z[u * d..(u + 1) * d];
    let total: f64 = pos.iter().map(|&(u, v)| neg_log_sigmoid(dot(row(u), row(v)))).sum::<f64>()
        + neg.iter().map(|&(u, v)| neg_log_sigmoid(-dot(row(u), row(v)))).sum::<f64>();
    Ok(total / pos.len().max(1) as f64)
}

/// Loss and its analytic gradient with respect to every `W_k`, `B_k`.
pub fn gnn_gradients(
    params: &GnnParams,
    g: &SocialGraph,
    x: &[f64],
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
) -> Result<GnnGradients> {
    params.check(g, x)?;
    let n = g.num_nodes();
    let fw = params.forward_all(g, x);
    let kmax = params.layers();
    let d = params.dims[kmax];
    let z = &fw.h[kmax];
    let scale = 1.0 / pos.len().max(1) as f64;
    let mut grad = vec![0.0; n * d];
    let mut loss = 0.0;
    for (pairs, label) in [(pos, 1.0), (neg, 0.0)] {
        for &(u, v) in pairs {
            let s = dot(&z[u * d..(u + 1) * d], &z[v * d..(v + 1) * d]);
            loss += if label == 1.0 { neg_log_sigmoid(s) } else { neg_log_sigmoid(-s) };
            let c = (sigmoid(s) - label) * scale;
            for j in 0..d {
                grad[u * d + j] += c * z[v * d + j];
                grad[v * d + j] += c * z[u * d + j];
            }
        }
    }
    let mut gw: Vec<Vec<f64>> = params.w.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut gb: Vec<Vec<f64>> = params.b.iter().map(|b| vec![0.0; b.len()]).collect();
    for k in (0..kmax).rev() {
        let (din, dout) = (params.dims[k], params.dims[k + 1]);
        let delta: Vec<f64> = (0..n * dout)
            .map(|i| grad[i] * params.activation.derivative(fw.a[k][i], fw.h[k + 1][i]))
            .collect();
        let (mean, hprev) = (&fw.m[k], &fw.h[k]);
        for u in 0..n {
            for o in 0..dout {
                let du = delta[u * dout + o];
                if du == 0.0 {
                    continue;
                }
                for i in 0..din {
                    gw[k][o * din + i] += du * mean[u * din + i];
                    gb[k][o * din + i] += du * hprev[u * din + i];
                }
            }
        }
        if k == 0 {
            break;
        }
        let mut prev = vec![0.0; n * din];
        for u in 0..n {
            for o in 0..dout {
                let du = delta[u * dout + o];
                if du == 0.0 {
                    continue;
                }
                let brow = &params.b[k][o * din..(o + 1) * din];
                let wrow = &params.w[k][o * din..(o + 1) * din];
                for i in 0..din {
                    prev[u * din + i] += brow[i] * du;
                }
                // u's mean feeds on each neighbor v.
                let nbrs = g.neighbors(u);
                let inv = 1.0 / nbrs.len().max(1) as f64;
                for &v in nbrs {
                    for i in 0..din {
                        prev[v * din + i] += wrow[i] * du * inv;
                    }
                }
            }
        }
        grad = prev;
    }
    Ok(GnnGradients {
        loss: loss * scale,
        w: gw,
        b: gb,
    })
}

/// Trains `params` on co-occurrences from random walks over `g`, with the
/// workers' attribute vectors as layer-0 features, and returns `h^K`.
///
/// Each epoch takes [`STEPS_PER_EPOCH`] Adam steps on fresh batches of
/// `cfg.batch_size` positive pairs.
pub fn gnn_encode(g: &SocialGraph, workers: &[Worker], params: &GnnParams, cfg: &TrainConfig) -> Result<EmbeddingMatrix> {
    cfg.validate()?;
    for (i, &id) in g.node_ids().iter().enumerate() {
        if workers.get(i).is_none_or(|w| w.id != id) {
            return Err(Error::MissingAttributes(id));
        }
    }
    let x: Vec<f64> = worker_features(workers).into_iter().flatten().collect();
    let mut params = params.clone();
    params.check(g, &x)?;
    if cfg.epochs > 0 {
        let corpus = generate_walks(g, cfg)?;
        let noise = NoiseDistribution::new(&corpus.counts(), cfg.distortion)?;
        let mut rng = seed::rng(cfg.seed, &[tag::TRAIN, 2]);
        let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
        let mut mw: Vec<Vec<f64>> = params.w.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut vw = mw.clone();
        let mut mb = mw.clone();
        let mut vb = mw.clone();
        let mut t = 0;
        let walks: Vec<&Vec<usize>> = corpus.walks.iter().filter(|w| w.len() > 1).collect();
        if walks.is_empty() {
            let z = params.forward(g, &x)?;
            return EmbeddingMatrix::new(g.node_ids().to_vec(), *params.dims.last().unwrap(), z);
        }
        for _ in 0..cfg.epochs {
            for _ in 0..STEPS_PER_EPOCH {
                let mut pos = Vec::with_capacity(cfg.batch_size);
                let mut neg = Vec::with_capacity(cfg.batch_size * cfg.negative_samples);
                while pos.len() < cfg.batch_size {
                    let w = walks[rng.random_range(0..walks.len())];
                    let i = rng.random_range(0..w.len());
                    let off = rng.random_range(1..=cfg.window.max(1));
                    let j = if rng.random::<bool>() { i + off } else { i.wrapping_sub(off) };
                    if j >= w.len() {
                        continue;
                    }
                    pos.push((w[i], w[j]));
                    for _ in 0..cfg.negative_samples {
                        neg.push((w[i], noise.sample(&mut rng)));
                    }
                }
                let gr = gnn_gradients(&params, g, &x, &pos, &neg)?;
                t += 1;
                let (c1, c2) = (1.0 - f64::powi(beta1, t), 1.0 - f64::powi(beta2, t));
                for (p, gp, m, v) in [(&mut params.w, &gr.w, &mut mw, &mut vw), (&mut params.b, &gr.b, &mut mb, &mut vb)] {
                    for k in 0..p.len() {
                        for i in 0..p[k].len() {
                            m[k][i] = beta1 * m[k][i] + (1.0 - beta1) * gp[k][i];
                            v[k][i] = beta2 * v[k][i] + (1.0 - beta2) * gp[k][i] * gp[k][i];
                            p[k][i] -= cfg.learning_rate * (m[k][i] / c1) / ((v[k][i] / c2).sqrt() + eps);
                        }
                    }
                }
            }
        }
    }
    let z = params.forward(g, &x)?;
    EmbeddingMatrix::new(g.node_ids().to_vec(), *params.dims.last().unwrap(), z)
}
