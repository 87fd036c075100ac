//! Biased second-order random walks over an item graph, embedded with the
//! shared SGNS core.
//!
//! Transition weights follow the node2vec scheme: from the previous node
//! `t` standing at `v`, a candidate `x` is weighted 1/p if `x == t`, 1 if
//! `x` neighbors `t`, and 1/q otherwise. `p = q = 1` reduces to uniform
//! neighbor choice.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{mix_seed, sgns_train, EmbeddingKind, ItemGraph, SgnsConfig, SgnsOutput, WindowPairs};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub walk_len: usize,
    pub walks_per_node: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walk_len: 40,
            walks_per_node: 10,
            p: 1.0,
            q: 1.0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_len < 1 || self.walks_per_node < 1 {
            return Err(Error::InvalidInput(
                "walk_len and walks_per_node must be >= 1".into(),
            ));
        }
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::InvalidInput("node2vec p and q must be > 0".into()));
        }
        Ok(())
    }
}

/// Generate `walks_per_node` walks from every node. Each walk is seeded
/// independently from (seed, round, start), so output is reproducible and
/// independent of scheduling.
pub fn generate_walks(graph: &ItemGraph, cfg: &WalkConfig, seed: u64) -> Result<Vec<Vec<u32>>> {
    cfg.validate()?;
    if graph.n_nodes() == 0 {
        return Err(Error::InvalidInput("walk graph has no nodes".into()));
    }
    let isolated = (0..graph.n_nodes() as u32)
        .filter(|&v| graph.neighbors(v).is_empty())
        .count();
    if isolated > 0 {
        warn!("{isolated} isolated nodes produce single-node walks");
    }

    let mut walks = Vec::with_capacity(graph.n_nodes() * cfg.walks_per_node);
    let mut weights: Vec<f64> = Vec::new();
    for round in 0..cfg.walks_per_node {
        for start in 0..graph.n_nodes() as u32 {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, round as u64, start as u64));
            let mut walk = Vec::with_capacity(cfg.walk_len);
            walk.push(start);
            while walk.len() < cfg.walk_len {
                let cur = *walk.last().unwrap();
                let nbrs = graph.neighbors(cur);
                if nbrs.is_empty() {
                    break;
                }
                let next = if walk.len() == 1 {
                    nbrs[rng.gen_range(0..nbrs.len())]
                } else {
                    let prev = walk[walk.len() - 2];
                    weights.clear();
                    let mut acc = 0.0f64;
                    for &x in nbrs {
                        acc += if x == prev {
                            1.0 / cfg.p
                        } else if graph.has_edge(prev, x) {
                            1.0
                        } else {
                            1.0 / cfg.q
                        };
                        weights.push(acc);
                    }
                    let draw = rng.gen::<f64>() * acc;
                    nbrs[weights.partition_point(|&c| c <= draw).min(nbrs.len() - 1)]
                };
                walk.push(next);
            }
            walks.push(walk);
        }
    }
    Ok(walks)
}

/// Embed a graph: biased walks, then windowed SGNS over the walks.
pub fn node2vec_embed(
    graph: &ItemGraph,
    walk_cfg: &WalkConfig,
    cfg: &SgnsConfig,
    jobs: usize,
) -> Result<SgnsOutput> {
    let walks = generate_walks(graph, walk_cfg, cfg.seed)?;
    let pairs = WindowPairs::new(&walks, cfg.window);
    let mut out = sgns_train(&pairs, graph.n_nodes(), cfg, jobs)?;
    out.embedding.kind = EmbeddingKind::Node2vec;
    Ok(out)
}
