// SPDX-License-Identifier: Apache-2.0

//! Truncated random walks with node2vec return/in-out bias.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::TrainConfig;
use crate::graph::SocialGraph;
use crate::seed::{self, tag};
use crate::{Error, Result};

/// Walks over graph indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    /// Node id of every graph index.
    pub ids: Vec<u64>,
    pub walks: Vec<Vec<usize>>,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub p: f64,
    pub q: f64,
    pub num_nodes: usize,
}

impl WalkCorpus {
    pub fn tokens(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }

    /// Occurrence count of every node.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.num_nodes];
        for w in &self.walks {
            for &v in w {
                c[v] += 1;
            }
        }
        c
    }
}

fn walk(g: &SocialGraph, start: usize, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut path = Vec::with_capacity(cfg.walk_length);
    path.push(start);
    let uniform = cfg.p == 1.0 && cfg.q == 1.0;
    let ceiling = (1.0 / cfg.p).max(1.0).max(1.0 / cfg.q);
    while path.len() < cfg.walk_length {
        let cur = *path.last().unwrap();
        let nbrs = g.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        let prev = if path.len() >= 2 { Some(path[path.len() - 2]) } else { None };
        let next = match prev {
            Some(prev) if !uniform => loop {
                // Rejection sampling against the largest bias weight.
                let x = nbrs[rng.random_range(0..nbrs.len())];
                let w = if x == prev {
                    1.0 / cfg.p
                } else if g.has_edge(x, prev) {
                    1.0
                } else {
                    1.0 / cfg.q
                };
                if rng.random::<f64>() * ceiling < w {
                    break x;
                }
            },
            _ => nbrs[rng.random_range(0..nbrs.len())],
        };
        path.push(next);
    }
    path
}

/// `walks_per_node` rounds; each round visits every node once in a seeded
/// shuffled order. Walks are generated in parallel from per-(round, node)
/// streams, so the result does not depend on thread count.
pub fn generate_walks(g: &SocialGraph, cfg: &TrainConfig) -> Result<WalkCorpus> {
    cfg.validate()?;
    if g.num_nodes() == 0 {
        return Err(Error::InvalidArgument("cannot walk an empty graph".into()));
    }
    let n = g.num_nodes();
    let mut walks = Vec::with_capacity(n * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed::rng(cfg.seed, &[tag::WALK, u64::MAX, round as u64]));
        let batch: Vec<Vec<usize>> = order
            .par_iter()
            .map(|&start| {
                let mut rng = seed::rng(cfg.seed, &[tag::WALK, round as u64, start as u64]);
                walk(g, start, cfg, &mut rng)
            })
            .collect();
        walks.extend(batch);
    }
    Ok(WalkCorpus {
        ids: g.node_ids().to_vec(),
        walks,
        walk_length: cfg.walk_length,
        walks_per_node: cfg.walks_per_node,
        p: cfg.p,
        q: cfg.q,
        num_nodes: n,
    })
}
