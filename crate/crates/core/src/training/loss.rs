use std::collections::BTreeSet;

use crate::error::Result;
use crate::model::{Context, Pass};
use crate::numeric::{Gradients, ParamId};
use crate::par::{self, Exec};

/// Triples scored per tape. Fixed so that the reduction order does not
/// depend on the thread count.
const LOSS_CHUNK: usize = 64;

/// `(entity, positive item, negative item)`; the entity is a group or a
/// user depending on the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub entity: usize,
    pub pos: usize,
    pub neg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Group,
    User,
}

/// Loss of one batch and its gradient with respect to every touched
/// trainable tensor.
#[derive(Debug, Clone)]
pub struct BatchLoss {
    /// Mean pairwise loss plus the regularizer.
    pub loss: f64,
    /// Mean pairwise loss alone.
    pub pair_loss: f64,
    /// `lambda * ||theta||^2` over the touched parameters.
    pub reg: f64,
    pub grads: Gradients,
}

/// Mean BPR loss over `triples` plus `lambda` times the squared norm of
/// every trainable parameter the batch reads (whole dense tensors, single
/// rows of embedding tables).
///
/// All sampling inside the pass is keyed by `pass_seed`; calling twice with
/// the same seed evaluates the same deterministic function of the
/// parameters.
pub fn batch_loss(
    ctx: Context<'_>,
    task: Task,
    triples: &[Triple],
    lambda: f64,
    pass_seed: u64,
    training: bool,
    exec: Exec,
) -> Result<BatchLoss> {
    let scale = 1.0 / triples.len().max(1) as f64;
    let parts = par::map_chunks(exec, triples, LOSS_CHUNK, |offset, chunk| {
        let mut pass = Pass::new(ctx, pass_seed, training);
        let mut terms = Vec::with_capacity(chunk.len());
        for (j, t) in chunk.iter().enumerate() {
            let slot = 2 * (offset + j) as u64;
            let (pos, neg) = match task {
                Task::Group => (pass.score_group(t.entity, t.pos, slot)?, pass.score_group(t.entity, t.neg, slot + 1)?),
                Task::User => (pass.score_user(t.entity, t.pos, slot)?, pass.score_user(t.entity, t.neg, slot + 1)?),
            };
            terms.push((scale, pass.tape.bpr_loss(pos, neg)));
        }
        let total = pass.tape.weighted_sum(&terms)?;
        let value = pass.tape.scalar(total);
        let touched = pass.tape.touched();
        let grads = pass.tape.backward(total)?;
        Ok::<_, crate::Error>((value, touched, grads))
    });
    let mut pair_loss = 0.0;
    let mut grads = Gradients::new();
    let mut touched: BTreeSet<(ParamId, Option<usize>)> = BTreeSet::new();
    for part in parts {
        let (value, t, g) = part?;
        pair_loss += value;
        grads.merge(g);
        touched.extend(t);
    }
    let store = &ctx.params.store;
    let mut reg = 0.0;
    if lambda > 0.0 {
        for (id, row) in touched {
            let tensor = store.tensor(id);
            let values = match row {
                Some(r) => tensor.row(r),
                None => tensor.values(),
            };
            reg += values.iter().map(|x| x * x).sum::<f64>();
            let g: Vec<f64> = values.iter().map(|x| 2.0 * lambda * x).collect();
            match row {
                Some(r) => grads.add_row(id, r, &g),
                None => grads.add_dense(id, &g),
            }
        }
        reg *= lambda;
    }
    Ok(BatchLoss { loss: pair_loss + reg, pair_loss, reg, grads })
}

/// Group-item objective.
pub fn group_batch_loss(ctx: Context<'_>, triples: &[Triple], lambda: f64, pass_seed: u64, training: bool, exec: Exec) -> Result<BatchLoss> {
    batch_loss(ctx, Task::Group, triples, lambda, pass_seed, training, exec)
}

/// User-item objective.
pub fn user_batch_loss(ctx: Context<'_>, triples: &[Triple], lambda: f64, pass_seed: u64, training: bool, exec: Exec) -> Result<BatchLoss> {
    batch_loss(ctx, Task::User, triples, lambda, pass_seed, training, exec)
}
