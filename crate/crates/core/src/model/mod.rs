//! The HyperGroup forward model.
//!
//! Training runs through [`Pass`], which records every operation on a tape.
//! Inference uses the same `Pass` for embeddings (in evaluation mode, with a
//! fixed sampling seed) and [`ItemScorer`] to score all items per entity
//! without taping.

mod config;
mod forward;
mod params;

pub use config::{ModelConfig, Variant};
pub use forward::{Context, Pass};
pub use params::{ModelParams, Tower};

use crate::error::{Error, Result};
use crate::numeric::ops;
use crate::par::{self, Exec};

/// Entities embedded per worker chunk during inference.
const EMBED_CHUNK: usize = 32;

fn eval_value(ctx: Context<'_>, seed: u64, f: impl FnOnce(&mut Pass<'_>) -> Result<crate::numeric::Var>) -> Result<Vec<f64>> {
    let mut pass = Pass::new(ctx, seed, false);
    let v = f(&mut pass)?;
    Ok(pass.tape.value(v).to_vec())
}

/// `z_u`: social GNN output for user `u`.
pub fn ipm_embed(ctx: Context<'_>, seed: u64, u: usize) -> Result<Vec<f64>> {
    eval_value(ctx, seed, |p| p.ipm(ctx.cfg.ipm_layers, u))
}

/// `emb_u`.
pub fn member_embedding(ctx: Context<'_>, seed: u64, u: usize) -> Result<Vec<f64>> {
    eval_value(ctx, seed, |p| p.member_embedding(u))
}

/// `x^G_g`.
pub fn group_init(ctx: Context<'_>, seed: u64, g: usize) -> Result<Vec<f64>> {
    eval_value(ctx, seed, |p| p.group_init(g))
}

/// `l_{g,g'}` for an adjacent pair.
pub fn common_member_repr(ctx: Context<'_>, seed: u64, g: usize, other: usize) -> Result<Vec<f64>> {
    let idx = ctx
        .hyper
        .neighbors(g)
        .iter()
        .position(|n| n.group == other)
        .ok_or_else(|| Error::Contract(format!("groups {g} and {other} are not adjacent")))?;
    eval_value(ctx, seed, |p| p.common_member_repr(g, idx))
}

/// `z^G_g`: hyperedge GNN output for group `g`.
pub fn hrl_embed(ctx: Context<'_>, seed: u64, g: usize) -> Result<Vec<f64>> {
    eval_value(ctx, seed, |p| p.hrl(ctx.cfg.hrl_layers, g))
}

/// `emb^G_g`.
pub fn group_embedding(ctx: Context<'_>, seed: u64, g: usize) -> Result<Vec<f64>> {
    eval_value(ctx, seed, |p| p.group_embedding(g))
}

/// Inference-mode group score.
pub fn score_group(ctx: Context<'_>, seed: u64, g: usize, v: usize) -> Result<f64> {
    eval_value(ctx, seed, |p| p.score_group(g, v, 0)).map(|x| x[0])
}

/// Inference-mode user score.
pub fn score_user(ctx: Context<'_>, seed: u64, u: usize, v: usize) -> Result<f64> {
    eval_value(ctx, seed, |p| p.score_user(u, v, 0)).map(|x| x[0])
}

/// Group embeddings for `groups`, in order. Each chunk shares one pass, so
/// shared neighbors are computed once per chunk.
pub fn embed_groups(ctx: Context<'_>, seed: u64, groups: &[usize], exec: Exec) -> Result<Vec<Vec<f64>>> {
    embed_many(ctx, seed, groups, exec, |p, g| p.group_embedding(g))
}

/// Member embeddings for `users`, in order.
pub fn embed_users(ctx: Context<'_>, seed: u64, users: &[usize], exec: Exec) -> Result<Vec<Vec<f64>>> {
    embed_many(ctx, seed, users, exec, |p, u| p.member_embedding(u))
}

fn embed_many(
    ctx: Context<'_>,
    seed: u64,
    ids: &[usize],
    exec: Exec,
    f: impl Fn(&mut Pass<'_>, usize) -> Result<crate::numeric::Var> + Sync + Send,
) -> Result<Vec<Vec<f64>>> {
    let chunks = par::map_chunks(exec, ids, EMBED_CHUNK, |_, chunk| -> Result<Vec<Vec<f64>>> {
        let mut pass = Pass::new(ctx, seed, false);
        chunk
            .iter()
            .map(|&id| f(&mut pass, id).map(|v| pass.tape.value(v).to_vec()))
            .collect()
    });
    let mut out = Vec::with_capacity(ids.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Scores every item for a given entity embedding through one tower.
///
/// The first hidden layer acting on `[e ; v]` is split into an entity half
/// and an item half; the item half is precomputed once for all items.
pub struct ItemScorer<'a> {
    params: &'a ModelParams,
    tower: &'a Tower,
    /// Item half of the first layer (or of the output when there are no hidden layers).
    item_part: Vec<Vec<f64>>,
}

impl<'a> ItemScorer<'a> {
    pub fn new(params: &'a ModelParams, tower: &'a Tower) -> Self {
        let d = params.dim();
        let store = &params.store;
        let first = tower.hidden.first().map(|&(w, _)| w).unwrap_or(tower.output);
        let w = store.tensor(first);
        let (rows, cols) = (w.shape()[0], w.shape()[1]);
        let items = store.tensor(params.item_embeddings);
        let item_part = (0..items.shape()[0])
            .map(|v| {
                let x = items.row(v);
                (0..rows)
                    .map(|r| {
                        let row = &w.values()[r * cols + d..(r + 1) * cols];
                        row.iter().zip(x).map(|(a, b)| a * b).sum()
                    })
                    .collect()
            })
            .collect();
        ItemScorer { params, tower, item_part }
    }

    /// Scores of all items for `entity`, indexed by item.
    pub fn score_all(&self, entity: &[f64]) -> Result<Vec<f64>> {
        let d = self.params.dim();
        if entity.len() != d {
            return Err(Error::Dimension(format!("entity of length {}, expected {d}", entity.len())));
        }
        let store = &self.params.store;
        let first = self.tower.hidden.first().map(|&(w, _)| w).unwrap_or(self.tower.output);
        let w = store.tensor(first);
        let (rows, cols) = (w.shape()[0], w.shape()[1]);
        let bias = self.tower.hidden.first().map(|&(_, b)| store.tensor(b).values());
        let entity_part: Vec<f64> = (0..rows)
            .map(|r| {
                let row = &w.values()[r * cols..r * cols + d];
                let s: f64 = row.iter().zip(entity).map(|(a, b)| a * b).sum();
                s + bias.map_or(0.0, |b| b[r])
            })
            .collect();
        let mut scores = Vec::with_capacity(self.item_part.len());
        for item in &self.item_part {
            let pre: Vec<f64> = entity_part.iter().zip(item).map(|(a, b)| a + b).collect();
            if self.tower.hidden.is_empty() {
                scores.push(pre[0]);
                continue;
            }
            let mut h = ops::relu(&pre);
            for &(w, b) in &self.tower.hidden[1..] {
                let wt = store.tensor(w);
                h = ops::relu(&ops::affine(wt.values(), wt.shape()[0], Some(store.tensor(b).values()), &h)?);
            }
            let out = store.tensor(self.tower.output);
            scores.push(ops::affine(out.values(), 1, None, &h)?[0]);
        }
        Ok(scores)
    }
}
