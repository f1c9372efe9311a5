#![allow(dead_code)]

use hypergroup::data::InteractionDataset;
use hypergroup::graph::Graphs;
use hypergroup::model::{Context, ModelConfig, ModelParams};
use hypergroup::par::Exec;
use hypergroup::training::{batch_loss, Task, Triple};

/// 5 users, 4 groups, 6 items with overlapping groups, one isolated user
/// in the social graph and one group without hyperedge neighbors.
pub fn toy_dataset() -> InteractionDataset {
    let ds = InteractionDataset {
        num_users: 5,
        num_items: 6,
        num_groups: 4,
        social_edges: vec![(0, 1), (0, 2), (1, 2), (2, 3)],
        user_item: vec![(0, 0), (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 0)],
        group_item: vec![(0, 0), (0, 2), (1, 3), (2, 1), (3, 5)],
        memberships: vec![vec![0, 1], vec![1, 2, 3], vec![3, 0], vec![4]],
    };
    ds.validate().unwrap();
    ds
}

pub fn ctx<'a>(params: &'a ModelParams, cfg: &'a ModelConfig, graphs: &'a Graphs) -> Context<'a> {
    Context { params, cfg, social: &graphs.social, hyper: &graphs.hyper }
}

/// Triples pairing every positive with each item that is not a positive.
pub fn all_triples(pairs: &[(usize, usize)], n_items: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for &(e, pos) in pairs {
        for neg in 0..n_items {
            if !pairs.contains(&(e, neg)) {
                out.push(Triple { entity: e, pos, neg });
                break;
            }
        }
    }
    out
}

/// Largest relative error between the analytic gradient and central
/// differences over every entry of every trainable tensor. Relative error
/// uses `max(|analytic|, |numeric|, 1e-6)` as denominator.
pub fn max_gradient_error(
    params: &ModelParams,
    cfg: &ModelConfig,
    graphs: &Graphs,
    task: Task,
    triples: &[Triple],
    lambda: f64,
    seed: u64,
) -> (f64, String) {
    let h = 1e-5;
    let eval = |p: &ModelParams| batch_loss(ctx(p, cfg, graphs), task, triples, lambda, seed, true, Exec::Sequential).unwrap();
    let base = eval(params);
    let mut worst = (0.0, String::new());
    for (id, p) in params.store.iter() {
        if !p.trainable {
            continue;
        }
        let analytic = base.grads.dense(id, &params.store);
        for k in 0..p.tensor.len() {
            let mut plus = params.clone();
            plus.store.tensor_mut(id).values_mut()[k] += h;
            let mut minus = params.clone();
            minus.store.tensor_mut(id).values_mut()[k] -= h;
            let numeric = (eval(&plus).loss - eval(&minus).loss) / (2.0 * h);
            let denom = analytic[k].abs().max(numeric.abs()).max(1e-6);
            let rel = (analytic[k] - numeric).abs() / denom;
            if rel > worst.0 {
                worst = (rel, format!("{}[{k}] analytic {} numeric {numeric}", p.name, analytic[k]));
            }
        }
    }
    worst
}

/// Straight-line mean of vectors.
pub fn mean(vs: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vs[0].len()];
    for v in vs {
        for i in 0..out.len() {
            out[i] += v[i];
        }
    }
    for x in &mut out {
        *x /= vs.len() as f64;
    }
    out
}

/// `normalize(relu(W x))` with `W` row-major `[rows, x.len()]`.
pub fn gnn_layer(w: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    let rows = w.len() / cols;
    let mut y = vec![0.0; rows];
    for r in 0..rows {
        let mut s = 0.0;
        for c in 0..cols {
            s += w[r * cols + c] * x[c];
        }
        y[r] = if s > 0.0 { s } else { 0.0 };
    }
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1e-12 {
        for v in &mut y {
            *v /= norm;
        }
    }
    y
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
pub mod invariants;
