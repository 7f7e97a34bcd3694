// SPDX-License-Identifier: Apache-2.0

//! Dimensionality reduction: PCA and exact t-SNE.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::EmbeddingMatrix;
use crate::seed::{self, tag};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReduceMethod {
    Pca,
    Tsne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub learning_rate: f64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: 200.0,
        }
    }
}

/// Largest input accepted by the exact (quadratic) t-SNE.
pub const TSNE_MAX_POINTS: usize = 5000;

fn check_out_dim(e: &EmbeddingMatrix, out_dim: usize) -> Result<()> {
    if out_dim == 0 || out_dim > e.dim {
        return Err(Error::InvalidArgument(format!(
            "cannot reduce dimension {} to {out_dim}",
            e.dim
        )));
    }
    Ok(())
}

/// Projection onto the top `out_dim` principal components, each signed so
/// that its largest-magnitude loading is positive. Also returns the
/// fraction of variance explained by each kept component.
pub fn pca(e: &EmbeddingMatrix, out_dim: usize) -> Result<(EmbeddingMatrix, Vec<f64>)> {
    check_out_dim(e, out_dim)?;
    let (n, d) = (e.len(), e.dim);
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(e.row(i)) {
            *m += x / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, d, |i, j| e.row(i)[j] - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let mut components = DMatrix::zeros(d, out_dim);
    let mut explained = Vec::with_capacity(out_dim);
    for (c, &idx) in order.iter().take(out_dim).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let lead = (0..d)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v = -v;
        }
        components.set_column(c, &v);
        explained.push(if total > 0.0 { eig.eigenvalues[idx].max(0.0) / total } else { 0.0 });
    }
    let projected = centered * components;
    let data = (0..n).flat_map(|i| (0..out_dim).map(move |j| (i, j))).map(|(i, j)| projected[(i, j)]).collect();
    Ok((EmbeddingMatrix::new(e.ids.clone(), out_dim, data)?, explained))
}

/// Conditional affinities `p_{j|i}` for one row, by bisection on the
/// Gaussian precision to match `log(perplexity)` entropy.
fn row_affinities(d2: &[f64], i: usize, target_entropy: f64) -> Vec<f64> {
    let n = d2.len();
    let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
    let mut p = vec![0.0; n];
    let min_d = d2
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            if j == i {
                p[j] = 0.0;
                continue;
            }
            let v = (-(d2[j] - min_d) * beta).exp();
            p[j] = v;
            sum += v;
            weighted += v * (d2[j] - min_d);
        }
        let entropy = sum.ln() + beta * weighted / sum;
        let diff = entropy - target_entropy;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    let sum: f64 = p.iter().sum();
    if sum > 0.0 {
        p.iter_mut().for_each(|x| *x /= sum);
    }
    p
}

/// Exact t-SNE into `out_dim` dimensions (quadratic in the point count).
pub fn tsne(e: &EmbeddingMatrix, out_dim: usize, cfg: &TsneConfig, seed: u64) -> Result<EmbeddingMatrix> {
    check_out_dim(e, out_dim)?;
    let n = e.len();
    if n > TSNE_MAX_POINTS {
        return Err(Error::InvalidArgument(format!("exact t-SNE takes at most {TSNE_MAX_POINTS} points, got {n}")));
    }
    if n < 2 {
        return EmbeddingMatrix::new(e.ids.clone(), out_dim, vec![0.0; n * out_dim]);
    }
    let perplexity = cfg.perplexity.min((n - 1) as f64 / 3.0).max(1.0);
    let target = perplexity.ln();
    // Symmetrized joint affinities, stored in single precision.
    let cond: Vec<Vec<f32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = e.row(i);
            let d2: Vec<f64> = (0..n)
                .map(|j| xi.iter().zip(e.row(j)).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            row_affinities(&d2, i, target).into_iter().map(|v| v as f32).collect()
        })
        .collect();
    let mut p = vec![0f32; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i][j] as f64 + cond[j][i] as f64) / (2.0 * n as f64)).max(1e-12) as f32;
        }
        p[i * n + i] = 0.0;
    }
    drop(cond);

    let mut rng = seed::rng(seed, &[tag::TSNE]);
    let mut y: Vec<f64> = (0..n * out_dim)
        .map(|_| 1e-4 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    let mut velocity = vec![0.0; n * out_dim];
    let mut gains = vec![1.0; n * out_dim];
    let od = out_dim;
    for it in 0..cfg.iterations {
        let exaggeration = if it < cfg.exaggeration_iterations { cfg.early_exaggeration } else { 1.0 };
        let momentum = if it < cfg.exaggeration_iterations { 0.5 } else { 0.8 };
        // Per row: attractive sum, repulsive sum (unnormalized) and Z share.
        let rows: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let yi = &y[i * od..(i + 1) * od];
                let mut attr = vec![0.0; od];
                let mut rep = vec![0.0; od];
                let mut z = 0.0;
                let prow = &p[i * n..(i + 1) * n];
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let yj = &y[j * od..(j + 1) * od];
                    let mut d2 = 0.0;
                    for k in 0..od {
                        let t = yi[k] - yj[k];
                        d2 += t * t;
                    }
                    let num = 1.0 / (1.0 + d2);
                    z += num;
                    let a = prow[j] as f64 * num;
                    let r = num * num;
                    for k in 0..od {
                        let t = yi[k] - yj[k];
                        attr[k] += a * t;
                        rep[k] += r * t;
                    }
                }
                (attr, rep, z)
            })
            .collect();
        let z: f64 = rows.iter().map(|r| r.2).sum();
        for (i, (attr, rep, _)) in rows.iter().enumerate() {
            for k in 0..od {
                let idx = i * od + k;
                let grad = 4.0 * (exaggeration * attr[k] - rep[k] / z);
                gains[idx] = if (grad > 0.0) != (velocity[idx] > 0.0) {
                    gains[idx] + 0.2
                } else {
                    (gains[idx] * 0.8_f64).max(0.01)
                };
                velocity[idx] = momentum * velocity[idx] - cfg.learning_rate * gains[idx] * grad;
            }
        }
        for (yv, v) in y.iter_mut().zip(&velocity) {
            *yv += v;
        }
        for k in 0..od {
            let mean = (0..n).map(|i| y[i * od + k]).sum::<f64>() / n as f64;
            for i in 0..n {
                y[i * od + k] -= mean;
            }
        }
    }
    EmbeddingMatrix::new(e.ids.clone(), out_dim, y)
}

pub fn reduce_dim(e: &EmbeddingMatrix, out_dim: usize, method: ReduceMethod, seed: u64) -> Result<EmbeddingMatrix> {
    match method {
        ReduceMethod::Pca => pca(e, out_dim).map(|r| r.0),
        ReduceMethod::Tsne => tsne(e, out_dim, &TsneConfig::default(), seed),
    }
}
