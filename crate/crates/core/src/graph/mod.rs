//! Social graph, group hypergraph and fixed-size neighbor sampling.

mod hypergraph;
mod sampling;
mod social;

pub use hypergraph::{HyperNeighbor, Hypergraph};
pub use sampling::{sample_indices, sample_neighbors};
pub use social::SocialGraph;

use crate::data::InteractionDataset;

/// Both graph structures built from one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graphs {
    pub social: SocialGraph,
    pub hyper: Hypergraph,
}

impl Graphs {
    pub fn build(ds: &InteractionDataset) -> Self {
        Graphs {
            social: SocialGraph::build(ds),
            hyper: Hypergraph::build(ds),
        }
    }
}
