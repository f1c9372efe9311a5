use crate::data::InteractionDataset;

/// Undirected user-user graph with sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    pub adjacency: Vec<Vec<usize>>,
}

impl SocialGraph {
    pub fn build(ds: &InteractionDataset) -> Self {
        let mut adjacency = vec![Vec::new(); ds.num_users];
        for &(a, b) in &ds.social_edges {
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        SocialGraph { adjacency }
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn num_users(&self) -> usize {
        self.adjacency.len()
    }
}
