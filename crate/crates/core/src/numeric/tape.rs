//! Per-pass operation recording for reverse-mode gradients.
//!
//! A [`Tape`] borrows the parameter store, records every operation of one
//! forward pass as a node holding its output value, and is consumed by
//! [`Tape::backward`], which walks the nodes in reverse and returns the
//! parameter [`Gradients`]. Frozen parameters enter as constants.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;

use rand::Rng;

use super::ops;
use super::{Gradients, ParamId, ParamStore};
use crate::error::{Error, Result};

/// Handle to a recorded value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param { id: ParamId, row: Option<usize> },
    Linear { w: Var, b: Option<Var>, x: Var },
    Concat(Var, Var),
    Mean(Vec<Var>),
    WeightedSum(Vec<(f64, Var)>),
    Relu(Var),
    Sigmoid(Var),
    L2Normalize { x: Var, norm: f64 },
    Dropout { x: Var, mask: Vec<f64> },
    Bpr { pos: Var, neg: Var },
}

#[derive(Debug)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    store: &'p ParamStore,
    nodes: Vec<Node>,
    params: FxHashMap<(ParamId, Option<usize>), Var>,
}

impl<'p> Tape<'p> {
    pub fn new(store: &'p ParamStore) -> Self {
        Tape {
            store,
            nodes: Vec::new(),
            params: FxHashMap::default(),
        }
    }

    pub fn store(&self) -> &'p ParamStore {
        self.store
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&mut self, value: Vec<f64>) -> Var {
        self.push(value, Op::Constant)
    }

    fn param_node(&mut self, id: ParamId, row: Option<usize>) -> Var {
        if let Some(&v) = self.params.get(&(id, row)) {
            return v;
        }
        let p = self.store.get(id);
        let value = match row {
            Some(r) => p.tensor.row(r).to_vec(),
            None => p.tensor.values().to_vec(),
        };
        let op = if p.trainable {
            Op::Param { id, row }
        } else {
            Op::Constant
        };
        let v = self.push(value, op);
        self.params.insert((id, row), v);
        v
    }

    /// A whole tensor, flattened. Recorded once per tape.
    pub fn param(&mut self, id: ParamId) -> Var {
        self.param_node(id, None)
    }

    /// One row of a row-sparse tensor. Recorded once per tape.
    pub fn param_row(&mut self, id: ParamId, row: usize) -> Var {
        self.param_node(id, Some(row))
    }

    /// Trainable parameters (whole tensors or rows) read by this pass.
    pub fn touched(&self) -> BTreeSet<(ParamId, Option<usize>)> {
        self.params
            .keys()
            .filter(|(id, _)| self.store.get(*id).trainable)
            .copied()
            .collect()
    }

    /// `W x (+ b)` where `w` holds a row-major `out x len(x)` matrix.
    pub fn linear(&mut self, w: Var, b: Option<Var>, x: Var, out: usize) -> Result<Var> {
        let y = ops::affine(self.value(w), out, b.map(|b| self.value(b)), self.value(x))?;
        Ok(self.push(y, Op::Linear { w, b, x }))
    }

    pub fn concat(&mut self, a: Var, b: Var) -> Var {
        let y = ops::concat(self.value(a), self.value(b));
        self.push(y, Op::Concat(a, b))
    }

    pub fn mean(&mut self, xs: &[Var]) -> Result<Var> {
        let vals: Vec<&[f64]> = xs.iter().map(|&x| self.value(x)).collect();
        let y = ops::mean_vectors(&vals)?;
        Ok(self.push(y, Op::Mean(xs.to_vec())))
    }

    pub fn weighted_sum(&mut self, pairs: &[(f64, Var)]) -> Result<Var> {
        let vals: Vec<(f64, &[f64])> = pairs.iter().map(|&(w, x)| (w, self.value(x))).collect();
        let y = ops::weighted_sum(&vals)?;
        Ok(self.push(y, Op::WeightedSum(pairs.to_vec())))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.weighted_sum(&[(1.0, a), (1.0, b)])
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let y = ops::relu(self.value(x));
        self.push(y, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let y = ops::sigmoid(self.value(x));
        self.push(y, Op::Sigmoid(x))
    }

    pub fn l2_normalize(&mut self, x: Var) -> Var {
        let norm = ops::l2_norm(self.value(x));
        let y = ops::l2_normalize(self.value(x));
        self.push(y, Op::L2Normalize { x, norm })
    }

    pub fn dropout<R: Rng + ?Sized>(&mut self, x: Var, ratio: f64, rng: &mut R, training: bool) -> Var {
        if !training || ratio <= 0.0 {
            return x;
        }
        let mask = ops::dropout_mask(self.value(x).len(), ratio, rng);
        let y = self.value(x).iter().zip(&mask).map(|(v, m)| v * m).collect();
        self.push(y, Op::Dropout { x, mask })
    }

    /// Scalar `-ln sigmoid(pos - neg)` from two scalar nodes.
    pub fn bpr_loss(&mut self, pos: Var, neg: Var) -> Var {
        let y = ops::bpr_pair_loss(self.scalar(pos), self.scalar(neg));
        self.push(vec![y], Op::Bpr { pos, neg })
    }

    /// Runs the reverse sweep from scalar `loss`, consuming the tape.
    pub fn backward(self, loss: Var) -> Result<Gradients> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::Contract("backward from a non-scalar node".into()));
        }
        let mut adj: Vec<Option<Vec<f64>>> = (0..=loss.0).map(|_| None).collect();
        adj[loss.0] = Some(vec![1.0]);
        let mut grads = Gradients::new();

        fn acc(adj: &mut [Option<Vec<f64>>], v: Var, g: &[f64]) {
            match &mut adj[v.0] {
                Some(buf) => buf.iter_mut().zip(g).for_each(|(b, x)| *b += x),
                slot @ None => *slot = Some(g.to_vec()),
            }
        }

        for i in (0..=loss.0).rev() {
            let Some(dy) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Constant => {}
                Op::Param { id, row } => match row {
                    Some(r) => grads.add_row(*id, *r, &dy),
                    None => grads.add_dense(*id, &dy),
                },
                Op::Linear { w, b, x } => {
                    let xv = &self.nodes[x.0].value;
                    let wv = &self.nodes[w.0].value;
                    let inp = xv.len();
                    // Weight gradients accumulate in place: a weight node is
                    // shared by many linear ops within one pass.
                    let mut dw = adj[w.0].take().unwrap_or_else(|| vec![0.0; wv.len()]);
                    let mut dx = vec![0.0; inp];
                    for (o, &g) in dy.iter().enumerate() {
                        if g == 0.0 {
                            continue;
                        }
                        let row = &wv[o * inp..(o + 1) * inp];
                        let drow = &mut dw[o * inp..(o + 1) * inp];
                        for j in 0..inp {
                            drow[j] += g * xv[j];
                            dx[j] += g * row[j];
                        }
                    }
                    adj[w.0] = Some(dw);
                    if let Some(b) = b {
                        acc(&mut adj, *b, &dy);
                    }
                    acc(&mut adj, *x, &dx);
                }
                Op::Concat(a, b) => {
                    let p = self.nodes[a.0].value.len();
                    acc(&mut adj, *a, &dy[..p]);
                    acc(&mut adj, *b, &dy[p..]);
                }
                Op::Mean(xs) => {
                    let inv = 1.0 / xs.len() as f64;
                    let g: Vec<f64> = dy.iter().map(|v| v * inv).collect();
                    for x in xs {
                        acc(&mut adj, *x, &g);
                    }
                }
                Op::WeightedSum(pairs) => {
                    for (w, x) in pairs {
                        let g: Vec<f64> = dy.iter().map(|v| v * w).collect();
                        acc(&mut adj, *x, &g);
                    }
                }
                Op::Relu(x) => {
                    let xv = &self.nodes[x.0].value;
                    let g: Vec<f64> = dy
                        .iter()
                        .zip(xv)
                        .map(|(g, &v)| if v > 0.0 { *g } else { 0.0 })
                        .collect();
                    acc(&mut adj, *x, &g);
                }
                Op::Sigmoid(x) => {
                    let g: Vec<f64> = dy
                        .iter()
                        .zip(&node.value)
                        .map(|(g, s)| g * s * (1.0 - s))
                        .collect();
                    acc(&mut adj, *x, &g);
                }
                Op::L2Normalize { x, norm } => {
                    if *norm > ops::NORM_EPS {
                        let y = &node.value;
                        let dot: f64 = y.iter().zip(&dy).map(|(a, b)| a * b).sum();
                        let g: Vec<f64> = dy
                            .iter()
                            .zip(y)
                            .map(|(g, yi)| (g - yi * dot) / norm)
                            .collect();
                        acc(&mut adj, *x, &g);
                    } else {
                        acc(&mut adj, *x, &dy);
                    }
                }
                Op::Dropout { x, mask } => {
                    let g: Vec<f64> = dy.iter().zip(mask).map(|(g, m)| g * m).collect();
                    acc(&mut adj, *x, &g);
                }
                Op::Bpr { pos, neg } => {
                    let (gp, gn) = ops::bpr_pair_grad(
                        self.nodes[pos.0].value[0],
                        self.nodes[neg.0].value[0],
                    );
                    acc(&mut adj, *pos, &[dy[0] * gp]);
                    acc(&mut adj, *neg, &[dy[0] * gn]);
                }
            }
        }
        Ok(grads)
    }
}
