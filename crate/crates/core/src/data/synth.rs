//! Synthetic datasets with planted topic structure.
//!
//! Users and items carry latent topics. Social ties form mostly within a
//! topic, groups gather socially connected users of one topic, and both
//! user-item and group-item interactions favour items of the owner's topic.
//! `overlap_strength` is the probability that a new member slot is filled
//! by a user who already belongs to another group.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::InteractionDataset;
use crate::error::{Error, Result};
use crate::rng::{stream, tag, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub num_users: usize,
    pub num_items: usize,
    pub num_groups: usize,
    pub avg_group_size: f64,
    pub num_latent_topics: usize,
    pub overlap_strength: f64,
    /// Mean user-item interactions per user (at least one each).
    pub interactions_per_user: f64,
    /// Mean group-item interactions per group (at least one each).
    pub interactions_per_group: f64,
    pub avg_friends: f64,
    /// Probability that an interaction or friendship stays within the topic.
    pub topic_purity: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_users: 50,
            num_items: 40,
            num_groups: 30,
            avg_group_size: 4.0,
            num_latent_topics: 3,
            overlap_strength: 0.5,
            interactions_per_user: 8.0,
            interactions_per_group: 3.0,
            avg_friends: 4.0,
            topic_purity: 0.9,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.num_users == 0 || self.num_items < 2 || self.num_groups == 0 {
            return err("need at least 1 user, 2 items and 1 group".into());
        }
        if self.num_latent_topics == 0 {
            return err("num_latent_topics must be positive".into());
        }
        if self.avg_group_size.is_nan() || self.avg_group_size < 1.0 {
            return err(format!("avg_group_size {} < 1", self.avg_group_size));
        }
        if self.avg_group_size > self.num_users as f64 {
            return err(format!(
                "avg_group_size {} exceeds num_users {}",
                self.avg_group_size, self.num_users
            ));
        }
        for (name, p) in [
            ("overlap_strength", self.overlap_strength),
            ("topic_purity", self.topic_purity),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("{name} {p} outside [0, 1]"));
            }
        }
        for (name, x) in [
            ("interactions_per_user", self.interactions_per_user),
            ("interactions_per_group", self.interactions_per_group),
            ("avg_friends", self.avg_friends),
        ] {
            if !x.is_finite() || x < 0.0 {
                return err(format!("{name} {x} must be a non-negative number"));
            }
        }
        Ok(())
    }
}

// integer with the given mean: floor(mean) plus a Bernoulli on the fraction
fn count_around(rng: &mut StreamRng, mean: f64) -> usize {
    let base = mean.floor();
    base as usize + usize::from(rng.gen_bool((mean - base).clamp(0.0, 1.0)))
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: StreamRng,
    user_topic: Vec<usize>,
    users_by_topic: Vec<Vec<usize>>,
    items_by_topic: Vec<Vec<usize>>,
}

impl Generator<'_> {
    fn draw_items(&mut self, topic: usize, count: usize) -> Vec<usize> {
        let n = self.cfg.num_items;
        let count = count.clamp(1, n - 1);
        let mut chosen = Vec::with_capacity(count);
        let mut seen = HashSet::new();
        let mut attempts = 0;
        while chosen.len() < count {
            attempts += 1;
            let pool = &self.items_by_topic[topic];
            let v = if !pool.is_empty() && attempts < 50 * count && self.rng.gen_bool(self.cfg.topic_purity) {
                pool[self.rng.gen_range(0..pool.len())]
            } else {
                self.rng.gen_range(0..n)
            };
            if seen.insert(v) {
                chosen.push(v);
            }
        }
        chosen
    }

    fn social_edges(&mut self) -> Vec<(usize, usize)> {
        let m = self.cfg.num_users;
        if m < 2 {
            return Vec::new();
        }
        let target = ((m as f64) * self.cfg.avg_friends / 2.0).round() as usize;
        let target = target.min(m * (m - 1) / 2);
        let mut edges = BTreeSet::new();
        let mut attempts = 0;
        while edges.len() < target && attempts < 100 * target + 100 {
            attempts += 1;
            let u = self.rng.gen_range(0..m);
            let pool = &self.users_by_topic[self.user_topic[u]];
            let w = if pool.len() > 1 && self.rng.gen_bool(self.cfg.topic_purity) {
                pool[self.rng.gen_range(0..pool.len())]
            } else {
                self.rng.gen_range(0..m)
            };
            if u != w {
                edges.insert((u.min(w), u.max(w)));
            }
        }
        edges.into_iter().collect()
    }

    fn groups(&mut self, adjacency: &[Vec<usize>]) -> (Vec<Vec<usize>>, Vec<usize>) {
        let cfg = self.cfg;
        let m = cfg.num_users;
        let t = cfg.num_latent_topics;
        let mut used = vec![false; m];
        let mut memberships = Vec::with_capacity(cfg.num_groups);
        let mut topics = Vec::with_capacity(cfg.num_groups);
        for _ in 0..cfg.num_groups {
            let mut size = count_around(&mut self.rng, cfg.avg_group_size);
            match self.rng.gen_range(0..3) {
                0 if size > 1 => size -= 1,
                1 => size += 1,
                _ => {}
            }
            let size = size.clamp(1, m);
            let topic = self.rng.gen_range(0..t);
            let mut members: Vec<usize> = Vec::with_capacity(size);
            while members.len() < size {
                let reuse = self.rng.gen_bool(cfg.overlap_strength);
                let friends: Vec<usize> = members
                    .iter()
                    .flat_map(|&u| adjacency[u].iter().copied())
                    .filter(|w| !members.contains(w))
                    .collect();
                let tiers: [Vec<usize>; 3] = [
                    friends.iter().copied().filter(|&w| used[w] == reuse).collect(),
                    self.users_by_topic[topic]
                        .iter()
                        .copied()
                        .filter(|&w| used[w] == reuse && !members.contains(&w))
                        .collect(),
                    (0..m).filter(|&w| used[w] == reuse && !members.contains(&w)).collect(),
                ];
                let pick = tiers
                    .iter()
                    .find(|tier| !tier.is_empty())
                    .map(|tier| tier[self.rng.gen_range(0..tier.len())]);
                let u = match pick {
                    Some(u) => u,
                    None => {
                        let rest: Vec<usize> = (0..m).filter(|w| !members.contains(w)).collect();
                        rest[self.rng.gen_range(0..rest.len())]
                    }
                };
                members.push(u);
            }
            for &u in &members {
                used[u] = true;
            }
            memberships.push(members);
            topics.push(topic);
        }
        (memberships, topics)
    }
}

/// Generates a dataset satisfying every [`InteractionDataset`] invariant.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<InteractionDataset> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, &[tag::SYNTH]);
    let t = cfg.num_latent_topics;

    let mut perm: Vec<usize> = (0..cfg.num_users).collect();
    perm.shuffle(&mut rng);
    let user_topic: Vec<usize> = perm.iter().map(|p| p % t).collect();
    let mut perm: Vec<usize> = (0..cfg.num_items).collect();
    perm.shuffle(&mut rng);
    let item_topic: Vec<usize> = perm.iter().map(|p| p % t).collect();

    let mut users_by_topic = vec![Vec::new(); t];
    for (u, &k) in user_topic.iter().enumerate() {
        users_by_topic[k].push(u);
    }
    let mut items_by_topic = vec![Vec::new(); t];
    for (v, &k) in item_topic.iter().enumerate() {
        items_by_topic[k].push(v);
    }

    let mut gen = Generator {
        cfg,
        rng,
        user_topic,
        users_by_topic,
        items_by_topic,
    };

    let social_edges = gen.social_edges();
    let mut adjacency = vec![Vec::new(); cfg.num_users];
    for &(a, b) in &social_edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let (memberships, group_topic) = gen.groups(&adjacency);

    let mut user_item = Vec::new();
    for u in 0..cfg.num_users {
        let c = count_around(&mut gen.rng, cfg.interactions_per_user);
        let topic = gen.user_topic[u];
        user_item.extend(gen.draw_items(topic, c).into_iter().map(|v| (u, v)));
    }
    let mut group_item = Vec::new();
    for (g, &topic) in group_topic.iter().enumerate() {
        let c = count_around(&mut gen.rng, cfg.interactions_per_group);
        group_item.extend(gen.draw_items(topic, c).into_iter().map(|v| (g, v)));
    }

    let ds = InteractionDataset {
        num_users: cfg.num_users,
        num_items: cfg.num_items,
        num_groups: cfg.num_groups,
        social_edges,
        user_item,
        group_item,
        memberships,
    };
    ds.validate()?;
    Ok(ds)
}
