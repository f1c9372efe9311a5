//! Interaction data: the social relation, user-item and group-item
//! interactions, and group memberships.

mod io;
mod split;
mod synth;

pub use io::{dataset_fingerprint, load_dataset, write_dataset, IdMap, LoadedDataset, DATA_FILES};
pub use split::{split_interactions, SplitSpec, Splits};
pub use synth::{generate_synthetic, SynthConfig};

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// Users, items and groups with their four interaction relations.
///
/// All indices are dense and 0-based. `social_edges` holds each unordered
/// pair once as `(low, high)`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionDataset {
    pub num_users: usize,
    pub num_items: usize,
    pub num_groups: usize,
    pub social_edges: Vec<(usize, usize)>,
    pub user_item: Vec<(usize, usize)>,
    pub group_item: Vec<(usize, usize)>,
    pub memberships: Vec<Vec<usize>>,
}

impl InteractionDataset {
    /// Puts social edges into canonical form: `(low, high)`, sorted, no
    /// duplicates, no self-loops. Returns the number of dropped self-loops.
    pub fn canonicalize_social(&mut self) -> usize {
        let before = self.social_edges.len();
        let set: BTreeSet<(usize, usize)> = self
            .social_edges
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        let loops = self.social_edges.iter().filter(|(a, b)| a == b).count();
        self.social_edges = set.into_iter().collect();
        debug_assert!(self.social_edges.len() <= before);
        loops
    }

    pub fn group_size(&self, g: usize) -> usize {
        self.memberships[g].len()
    }

    /// Checks every structural invariant of the dataset.
    pub fn validate(&self) -> Result<()> {
        let mut prev = None;
        for &(a, b) in &self.social_edges {
            if a >= self.num_users || b >= self.num_users {
                return Err(Error::Integrity(format!("social edge ({a},{b}) out of range")));
            }
            if a >= b {
                return Err(Error::Integrity(format!(
                    "social edge ({a},{b}) is not canonical (low, high)"
                )));
            }
            if prev >= Some((a, b)) {
                return Err(Error::Integrity("social edges not sorted/unique".into()));
            }
            prev = Some((a, b));
        }
        check_pairs("user_item", &self.user_item, self.num_users, self.num_items)?;
        check_pairs("group_item", &self.group_item, self.num_groups, self.num_items)?;
        if self.memberships.len() != self.num_groups {
            return Err(Error::Integrity(format!(
                "{} membership lists for {} groups",
                self.memberships.len(),
                self.num_groups
            )));
        }
        for (g, members) in self.memberships.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Integrity(format!("group {g} has no members")));
            }
            let mut seen = HashSet::new();
            for &u in members {
                if u >= self.num_users {
                    return Err(Error::Integrity(format!("group {g} member {u} out of range")));
                }
                if !seen.insert(u) {
                    return Err(Error::Integrity(format!("group {g} lists member {u} twice")));
                }
            }
        }
        Ok(())
    }

    /// Copy with the same entities, social edges and memberships but the
    /// given interaction lists.
    pub fn with_interactions(
        &self,
        user_item: Vec<(usize, usize)>,
        group_item: Vec<(usize, usize)>,
    ) -> Self {
        InteractionDataset {
            num_users: self.num_users,
            num_items: self.num_items,
            num_groups: self.num_groups,
            social_edges: self.social_edges.clone(),
            user_item,
            group_item,
            memberships: self.memberships.clone(),
        }
    }

    /// Per-user sets of interacted items.
    pub fn user_positives(&self) -> Vec<HashSet<usize>> {
        positives(self.num_users, &self.user_item)
    }

    /// Per-group sets of interacted items.
    pub fn group_positives(&self) -> Vec<HashSet<usize>> {
        positives(self.num_groups, &self.group_item)
    }
}

fn positives(n: usize, pairs: &[(usize, usize)]) -> Vec<HashSet<usize>> {
    let mut out = vec![HashSet::new(); n];
    for &(e, v) in pairs {
        out[e].insert(v);
    }
    out
}

fn check_pairs(name: &str, pairs: &[(usize, usize)], n_left: usize, n_items: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(pairs.len());
    for &(e, v) in pairs {
        if e >= n_left || v >= n_items {
            return Err(Error::Integrity(format!("{name} pair ({e},{v}) out of range")));
        }
        if !seen.insert((e, v)) {
            return Err(Error::Integrity(format!("{name} pair ({e},{v}) duplicated")));
        }
    }
    Ok(())
}

/// Removes duplicate pairs, keeping first occurrences. Returns the count removed.
pub(crate) fn dedup_pairs(pairs: &mut Vec<(usize, usize)>) -> usize {
    let mut seen = HashSet::with_capacity(pairs.len());
    let before = pairs.len();
    pairs.retain(|p| seen.insert(*p));
    before - pairs.len()
}
