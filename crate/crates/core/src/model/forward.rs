//! The forward model recorded on a [`Tape`].
//!
//! Every intermediate representation is memoized per pass, so a user or
//! group reached through several paths is computed once and receives the
//! sum of all gradient contributions. Neighbor samples are drawn from a
//! stream keyed by `(pass seed, layer, node)`: within a pass each node has
//! exactly one sampled neighborhood per layer, independent of the order
//! in which nodes are visited.

use rustc_hash::FxHashMap;

use super::{ModelConfig, ModelParams, Tower};
use crate::error::{Error, Result};
use crate::graph::{sample_indices, sample_neighbors, Hypergraph, SocialGraph};
use crate::numeric::{Tape, Var};
use crate::rng::{stream, tag};

/// Read-only inputs of a forward pass.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub params: &'a ModelParams,
    pub cfg: &'a ModelConfig,
    pub social: &'a SocialGraph,
    pub hyper: &'a Hypergraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Ipm(usize, usize),
    Member(usize),
    GroupInit(usize),
    Common(usize, usize),
    Hrl(usize, usize),
    Group(usize),
}

/// One forward pass. Training passes apply dropout; evaluation passes do not.
pub struct Pass<'a> {
    ctx: Context<'a>,
    pub tape: Tape<'a>,
    seed: u64,
    training: bool,
    memo: FxHashMap<Key, Var>,
}

impl<'a> Pass<'a> {
    pub fn new(ctx: Context<'a>, seed: u64, training: bool) -> Self {
        Pass {
            ctx,
            tape: Tape::new(&ctx.params.store),
            seed,
            training,
            memo: FxHashMap::default(),
        }
    }

    pub fn context(&self) -> Context<'a> {
        self.ctx
    }

    fn memoized(&mut self, key: Key, f: impl FnOnce(&mut Self) -> Result<Var>) -> Result<Var> {
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = f(self)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    /// `sigma(W [own ; neighbors])` followed by L2 normalization.
    fn gnn_layer(&mut self, weight: crate::numeric::ParamId, own: Var, neighbors: Var) -> Result<Var> {
        let c = self.tape.concat(own, neighbors);
        let w = self.tape.param(weight);
        let h = self.tape.linear(w, None, c, self.ctx.cfg.dim)?;
        let h = self.tape.relu(h);
        Ok(self.tape.l2_normalize(h))
    }

    /// Social GNN representation of user `u` after `layer` layers
    /// (layer 0 is the frozen input feature).
    pub fn ipm(&mut self, layer: usize, u: usize) -> Result<Var> {
        self.memoized(Key::Ipm(layer, u), |p| {
            let features = p
                .ctx
                .params
                .node_features
                .ok_or_else(|| Error::Contract("social GNN disabled by variant".into()))?;
            if layer == 0 {
                return Ok(p.tape.param_row(features, u));
            }
            let own = p.ipm(layer - 1, u)?;
            let mut rng = stream(p.seed, &[tag::IPM_SAMPLE, layer as u64, u as u64]);
            let sampled = sample_neighbors(p.ctx.social.neighbors(u), u, p.ctx.cfg.ipm_samples, &mut rng);
            let prev = sampled
                .into_iter()
                .map(|n| p.ipm(layer - 1, n))
                .collect::<Result<Vec<_>>>()?;
            let agg = p.tape.mean(&prev)?;
            p.gnn_layer(p.ctx.params.ipm[layer - 1], own, agg)
        })
    }

    /// `z_u + z'_u`, or `z'_u` alone without the social GNN.
    pub fn member_embedding(&mut self, u: usize) -> Result<Var> {
        self.memoized(Key::Member(u), |p| {
            let latent = p.tape.param_row(p.ctx.params.user_latent, u);
            if !p.ctx.cfg.variant.uses_ipm() {
                return Ok(latent);
            }
            let z = p.ipm(p.ctx.cfg.ipm_layers, u)?;
            p.tape.add(z, latent)
        })
    }

    /// Uniform average of the members' embeddings.
    pub fn group_init(&mut self, g: usize) -> Result<Var> {
        self.memoized(Key::GroupInit(g), |p| {
            let members = p.ctx.hyper.members(g);
            if members.is_empty() {
                return Err(Error::Contract(format!("group {g} has no members")));
            }
            let embs = members
                .iter()
                .map(|&u| p.member_embedding(u))
                .collect::<Result<Vec<_>>>()?;
            p.tape.mean(&embs)
        })
    }

    /// Mean embedding of the members shared by `g` and its `idx`-th incident
    /// hyperedge. Independent of the layer.
    pub fn common_member_repr(&mut self, g: usize, idx: usize) -> Result<Var> {
        let other = self.ctx.hyper.neighbors(g)[idx].group;
        self.memoized(Key::Common(g.min(other), g.max(other)), |p| {
            let common = &p.ctx.hyper.neighbors(g)[idx].common;
            if common.is_empty() {
                return Err(Error::Contract(format!("groups {g} and {other} share no members")));
            }
            let embs = common
                .iter()
                .map(|&u| p.member_embedding(u))
                .collect::<Result<Vec<_>>>()?;
            p.tape.mean(&embs)
        })
    }

    /// Hyperedge GNN representation of group `g` after `layer` layers
    /// (layer 0 is the group initialization).
    pub fn hrl(&mut self, layer: usize, g: usize) -> Result<Var> {
        self.memoized(Key::Hrl(layer, g), |p| {
            if layer == 0 {
                return p.group_init(g);
            }
            let own = p.hrl(layer - 1, g)?;
            let pool = p.ctx.hyper.neighbors(g);
            let mut rng = stream(p.seed, &[tag::HRL_SAMPLE, layer as u64, g as u64]);
            let agg = match sample_indices(pool.len(), p.ctx.cfg.hrl_samples, &mut rng) {
                None => p.tape.constant(vec![0.0; p.ctx.cfg.dim]),
                Some(picks) => {
                    let total: f64 = picks.iter().map(|&i| pool[i].weight as f64).sum();
                    let mut terms = Vec::with_capacity(picks.len());
                    for i in picks {
                        let neighbor = p.hrl(layer - 1, pool[i].group)?;
                        let common = p.common_member_repr(g, i)?;
                        let msg = p.tape.add(neighbor, common)?;
                        let mut alpha = pool[i].weight as f64;
                        if p.ctx.cfg.normalize_overlap {
                            alpha /= total;
                        }
                        terms.push((alpha, msg));
                    }
                    p.tape.weighted_sum(&terms)?
                }
            };
            p.gnn_layer(p.ctx.params.hrl[layer - 1], own, agg)
        })
    }

    /// `w * z^G + (1 - w) * x^G`, or `x^G` without the hyperedge GNN.
    pub fn group_embedding(&mut self, g: usize) -> Result<Var> {
        self.memoized(Key::Group(g), |p| {
            let init = p.group_init(g)?;
            if !p.ctx.cfg.variant.uses_hrl() {
                return Ok(init);
            }
            let z = p.hrl(p.ctx.cfg.hrl_layers, g)?;
            let w = p.ctx.cfg.residual_w;
            p.tape.weighted_sum(&[(w, z), (1.0 - w, init)])
        })
    }

    pub fn item_embedding(&mut self, v: usize) -> Var {
        self.tape.param_row(self.ctx.params.item_embeddings, v)
    }

    /// MLP score of `[entity ; item]`. `slot` keys the dropout stream.
    pub fn score(&mut self, tower: &Tower, entity: Var, v: usize, slot: u64) -> Result<Var> {
        let item = self.item_embedding(v);
        let mut h = self.tape.concat(entity, item);
        let mut rng = stream(self.seed, &[tag::DROPOUT, slot]);
        for &(w, b) in &tower.hidden {
            let out = self.ctx.params.store.tensor(w).shape()[0];
            let wv = self.tape.param(w);
            let bv = self.tape.param(b);
            h = self.tape.linear(wv, Some(bv), h, out)?;
            h = self.tape.relu(h);
            h = self.tape.dropout(h, self.ctx.cfg.dropout, &mut rng, self.training);
        }
        let out = self.tape.param(tower.output);
        self.tape.linear(out, None, h, 1)
    }

    pub fn score_group(&mut self, g: usize, v: usize, slot: u64) -> Result<Var> {
        let e = self.group_embedding(g)?;
        let tower = &self.ctx.params.group_tower;
        self.score(tower, e, v, slot)
    }

    pub fn score_user(&mut self, u: usize, v: usize, slot: u64) -> Result<Var> {
        let tower = self
            .ctx
            .params
            .user_tower
            .as_ref()
            .ok_or_else(|| Error::Contract("variant has no user tower".into()))?;
        let e = self.member_embedding(u)?;
        self.score(tower, e, v, slot)
    }
}
