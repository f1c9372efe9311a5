use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::data::InteractionDataset;

/// An incident hyperedge: another group sharing at least one member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperNeighbor {
    pub group: usize,
    /// Number of common members.
    pub weight: usize,
    /// Common members, ascending.
    pub common: Vec<usize>,
}

/// Groups as hyperedges over users.
///
/// `incidence[g]` is the sorted member set of `g` (row `g` of the incidence
/// matrix). `adjacency[g]` lists every other group sharing members with
/// `g`, sorted by group index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub incidence: Vec<Vec<usize>>,
    pub vertex_degree: Vec<usize>,
    pub adjacency: Vec<Vec<HyperNeighbor>>,
}

impl Hypergraph {
    pub fn build(ds: &InteractionDataset) -> Self {
        let incidence: Vec<Vec<usize>> = ds
            .memberships
            .iter()
            .map(|m| {
                let mut m = m.clone();
                m.sort_unstable();
                m.dedup();
                m
            })
            .collect();
        let mut groups_of = vec![Vec::new(); ds.num_users];
        for (g, members) in incidence.iter().enumerate() {
            for &u in members {
                groups_of[u].push(g);
            }
        }
        let vertex_degree = groups_of.iter().map(Vec::len).collect();
        let adjacency = incidence
            .iter()
            .enumerate()
            .map(|(g, members)| neighbors_via_index(Some(g), members, &groups_of))
            .collect();
        Hypergraph {
            incidence,
            vertex_degree,
            adjacency,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.incidence.len()
    }

    pub fn members(&self, g: usize) -> &[usize] {
        &self.incidence[g]
    }

    pub fn neighbors(&self, g: usize) -> &[HyperNeighbor] {
        &self.adjacency[g]
    }

    /// Index of a known group whose member set equals `members`, if any.
    pub fn find_group(&self, members: &[usize]) -> Option<usize> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.incidence.iter().position(|m| *m == sorted)
    }

    /// Copy with one extra group appended.
    ///
    /// The new group gets its own adjacency list against every known group;
    /// the adjacency of known groups is left untouched, so their
    /// embeddings do not change.
    pub fn with_transient_group(&self, members: &[usize]) -> (Hypergraph, usize) {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut groups_of = vec![Vec::new(); self.vertex_degree.len()];
        for (g, ms) in self.incidence.iter().enumerate() {
            for &u in ms {
                groups_of[u].push(g);
            }
        }
        let adj = neighbors_via_index(None, &sorted, &groups_of);
        let mut out = self.clone();
        let g = out.incidence.len();
        for &u in &sorted {
            out.vertex_degree[u] += 1;
        }
        out.incidence.push(sorted);
        out.adjacency.push(adj);
        (out, g)
    }

    /// Debug dump: one `g<TAB>g'<TAB>weight` line per directed adjacency entry.
    pub fn write_adjacency_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (g, list) in self.adjacency.iter().enumerate() {
            for n in list {
                writeln!(out, "{g}\t{}\t{}", n.group, n.weight)?;
            }
        }
        Ok(())
    }
}

fn neighbors_via_index(
    own: Option<usize>,
    members: &[usize],
    groups_of: &[Vec<usize>],
) -> Vec<HyperNeighbor> {
    let mut common: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &u in members {
        for &other in &groups_of[u] {
            if Some(other) != own {
                common.entry(other).or_default().push(u);
            }
        }
    }
    common
        .into_iter()
        .map(|(group, common)| HyperNeighbor {
            group,
            weight: common.len(),
            common,
        })
        .collect()
}
