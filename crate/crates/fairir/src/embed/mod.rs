//! Latent item representations.
//!
//! Two families are implemented from scratch: truncated rating-SVD
//! ([`svd_embed`]) and skip-gram with negative sampling ([`sgns_train`]),
//! the latter shared by [`item2vec_embed`] (windowed co-consumption pairs)
//! and [`node2vec_embed`] (biased random walks over an item graph).

mod node2vec;
mod sgns;
mod svd;

pub use node2vec::{generate_walks, node2vec_embed, WalkConfig};
pub use sgns::{item2vec_embed, sgns_train, PairStream, SgnsOutput, WindowPairs};
pub use svd::svd_embed;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Which stage produced an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    Svd,
    Item2vec,
    Node2vec,
    Fair,
    Concat,
}

impl EmbeddingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmbeddingKind::Svd => "svd",
            EmbeddingKind::Item2vec => "item2vec",
            EmbeddingKind::Node2vec => "node2vec",
            EmbeddingKind::Fair => "fair",
            EmbeddingKind::Concat => "concat",
        }
    }
}

/// Dense M×N item representation, row-major `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n_items: usize,
    dims: usize,
    data: Vec<f32>,
    kind: EmbeddingKind,
    seed: u64,
    config_hash: String,
}

impl EmbeddingMatrix {
    pub fn from_rows(n_items: usize, dims: usize, data: Vec<f32>, kind: EmbeddingKind, seed: u64) -> Self {
        assert_eq!(data.len(), n_items * dims, "row data does not match shape");
        EmbeddingMatrix {
            n_items,
            dims,
            data,
            kind,
            seed,
            config_hash: String::new(),
        }
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn set_config_hash(&mut self, hash: &str) {
        self.config_hash = hash.to_string();
    }

    /// Content digest over shape, kind and payload; stamped into downstream
    /// artifacts so networks can be traced back to the embedding that
    /// produced them.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.kind.as_str().as_bytes());
        hasher.update((self.n_items as u64).to_le_bytes());
        hasher.update((self.dims as u64).to_le_bytes());
        for &v in &self.data {
            hasher.update(v.to_le_bytes());
        }
        hex(&hasher.finalize()[..16])
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e: std::io::Error| Error::io(path, e);
        let header = EmbeddingHeader {
            schema_version: 1,
            kind: self.kind,
            n_items: self.n_items as u64,
            dims: self.dims as u64,
            seed: self.seed,
            config_hash: self.config_hash.clone(),
        };
        let header_bytes = serde_json::to_vec(&header).expect("header serializes");
        w.write_all(MAGIC).map_err(io)?;
        w.write_all(&(header_bytes.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(&header_bytes).map_err(io)?;
        for &v in &self.data {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>, expected_hash: Option<&str>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let io = |e: std::io::Error| Error::io(path, e);
        let bad = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(bad("not an embedding file (bad magic)".into()));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len).map_err(io)?;
        let mut header_bytes = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut header_bytes).map_err(io)?;
        let header: EmbeddingHeader =
            serde_json::from_slice(&header_bytes).map_err(|e| bad(format!("bad header: {e}")))?;
        if let Some(expected) = expected_hash {
            if header.config_hash != expected {
                return Err(Error::HashMismatch {
                    path: path.to_path_buf(),
                    found: header.config_hash,
                    expected: expected.to_string(),
                });
            }
        }
        let n = (header.n_items * header.dims) as usize;
        let mut data = Vec::with_capacity(n);
        let mut buf = [0u8; 4];
        for _ in 0..n {
            r.read_exact(&mut buf).map_err(io)?;
            data.push(f32::from_le_bytes(buf));
        }
        Ok(EmbeddingMatrix {
            n_items: header.n_items as usize,
            dims: header.dims as usize,
            data,
            kind: header.kind,
            seed: header.seed,
            config_hash: header.config_hash,
        })
    }

    /// One item per line: `item_id v1 v2 ...` (debugging aid).
    pub fn write_text(&self, path: impl AsRef<Path>, item_ids: &[String]) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e: std::io::Error| Error::io(path, e);
        for i in 0..self.n_items {
            let id = item_ids.get(i).map(String::as_str).unwrap_or("?");
            write!(w, "{id}").map_err(io)?;
            for v in self.row(i) {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }
}

const MAGIC: &[u8; 8] = b"FREMB001";

#[derive(Serialize, Deserialize)]
struct EmbeddingHeader {
    schema_version: u32,
    kind: EmbeddingKind,
    n_items: u64,
    dims: u64,
    seed: u64,
    config_hash: String,
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Cosine similarity, computed in f64. A zero vector has similarity 0
/// with everything (logged once per process).
pub fn cosine_sim(x: &[f32], y: &[f32]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut dot = 0.0f64;
    let mut nx = 0.0f64;
    let mut ny = 0.0f64;
    for (&a, &b) in x.iter().zip(y) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == 0.0 || ny == 0.0 {
        static ONCE: std::sync::Once = std::sync::Once::new();
        ONCE.call_once(|| log::warn!("cosine of a zero vector defined as 0"));
        return 0.0;
    }
    dot / (nx.sqrt() * ny.sqrt())
}

/// Hyperparameters for skip-gram negative-sampling training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dims: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Sliding-window radius over a sequence; `0` means unbounded (the
    /// whole sequence is one context set).
    pub window: usize,
    pub learning_rate: f32,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dims: 128,
            negatives: 15,
            epochs: 100,
            window: 5,
            learning_rate: 0.025,
            seed: 42,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims < 1 {
            return Err(Error::InvalidInput("sgns dims must be >= 1".into()));
        }
        if self.negatives < 1 {
            return Err(Error::InvalidInput("sgns negatives must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidInput("sgns epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidInput("sgns learning rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Undirected simple graph over item indices (sorted adjacency lists).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemGraph {
    adj: Vec<Vec<u32>>,
}

impl ItemGraph {
    /// Build from (possibly repeated, possibly one-directional) edges;
    /// self-loops are dropped.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut adj = vec![Vec::new(); n_nodes];
        for (a, b) in edges {
            if a == b {
                continue;
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        ItemGraph { adj }
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }
}

/// Deterministic per-task stream seeding.
pub(crate) fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut h = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 30;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^= h >> 31;
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_identity() {
        let x = [1.0f32, 2.0, -3.0];
        assert!((cosine_sim(&x, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_orthogonal() {
        assert_eq!(cosine_sim(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn cosine_known_value() {
        let got = cosine_sim(&[1.0, 0.0], &[1.0, 1.0]);
        assert!((got - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn cosine_zero_vector_is_zero() {
        assert_eq!(cosine_sim(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn embedding_round_trip() {
        let emb = EmbeddingMatrix::from_rows(
            2,
            3,
            vec![1.0, 2.0, 3.0, -4.0, 5.5, 0.25],
            EmbeddingKind::Svd,
            7,
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.emb");
        emb.write(&path).unwrap();
        let back = EmbeddingMatrix::read(&path, None).unwrap();
        assert_eq!(back, emb);
        assert_eq!(back.content_hash(), emb.content_hash());
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = SgnsConfig {
            epochs: 0,
            ..SgnsConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn item_graph_dedups_and_sorts() {
        let g = ItemGraph::from_edges(4, [(0, 1), (1, 0), (2, 1), (3, 3)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.neighbors(3).is_empty());
        assert!(g.has_edge(0, 1) && !g.has_edge(0, 3));
    }
}
