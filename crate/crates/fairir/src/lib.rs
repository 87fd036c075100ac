//! Fairness-aware related-item recommendation.
//!
//! This crate builds item-to-item recommendation networks from rating logs
//! and audits — then repairs — the exposure they distribute over the
//! catalog. The pipeline is:
//!
//! 1. [`corpus`] — parse rating datasets into a canonical [`corpus::RatingMatrix`],
//!    derive item quality, consumption sequences and like sets.
//! 2. [`embed`] — learn latent item vectors with truncated rating-SVD or
//!    skip-gram negative sampling (shared by item2vec sequences and
//!    node2vec walks).
//! 3. [`rin`] — build the Related Item Network: each item's top-`k` most
//!    similar items under a pluggable similarity.
//! 4. [`exposure`] — observed exposure (random-surfer steady state), desired
//!    exposure (a `β`-blend of uniform and merit), the KL exposure-bias
//!    score, over/adequate/under categorization and Lorenz statistics.
//! 5. [`fairness`] — three interventions at different pipeline stages:
//!    representation learning (`rl`), similarity computation (`sim`) and
//!    neighbor selection (`nbr`), plus a concatenation baseline.
//! 6. [`eval`] — relatedness cost (label overlap), user utility (like
//!    overlap) and per-run intervention reports.
//! 7. [`pipeline`] — config-driven orchestration with cached, hash-stamped
//!    artifacts, plus a seeded synthetic dataset generator.
//!
//! The `fairir` binary is a thin front-end over [`pipeline`]; the
//! `examples/` directory has one runnable example per capability.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod exposure;
pub mod fairness;
pub mod pipeline;
pub mod rin;

pub use error::{Error, Result};
