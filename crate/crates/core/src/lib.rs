//! Hierarchical graph-neural group recommendation.
//!
//! User embeddings are learned over a social graph, group embeddings are
//! learned as hyperedge embeddings over the group-membership hypergraph,
//! and the user-item and group-item ranking objectives are trained
//! together. The crate ships a full-ranking evaluation harness and a CLI.
//!
//! Module map:
//!
//! - [`data`]: TSV ingestion, ID remapping, splitting, synthetic datasets.
//! - [`graph`]: social graph, group hypergraph, seeded neighbor sampling.
//! - [`numeric`]: dense tensors, forward ops, a recording tape for
//!   reverse-mode gradients, checkpoint blobs.
//! - [`model`]: the forward model (social GNN, group initialization,
//!   hyperedge GNN, residual fusion, MLP scorers).
//! - [`training`]: negative sampling, pairwise losses, optimizers and the
//!   training strategies.
//! - [`eval`]: HR@N / NDCG@N under full ranking, popularity baseline.
//! - [`cli`]: the `hypergroup` command-line driver.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod par;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
