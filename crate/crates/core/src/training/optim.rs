use std::collections::BTreeMap;

use super::OptimizerKind;
use crate::error::Result;
use crate::numeric::{GradBuf, Gradients, ParamId, ParamStore};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Adam or plain SGD over a [`ParamStore`].
///
/// Adam is lazy for embedding tables: only rows present in the gradient
/// have their moments and values updated. The bias-correction step count
/// is global.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    moments: BTreeMap<ParamId, (Vec<f64>, Vec<f64>)>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Optimizer { kind, lr, step: 0, moments: BTreeMap::new() }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update. Non-finite gradients abort before any tensor is
    /// touched. Frozen tensors are never modified.
    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients) -> Result<()> {
        grads.check_finite(store)?;
        self.step += 1;
        let t = self.step as i32;
        let (c1, c2) = (1.0 - BETA1.powi(t), 1.0 - BETA2.powi(t));
        for (id, buf) in grads.iter() {
            if !store.get(id).trainable {
                continue;
            }
            let tensor = store.tensor_mut(id);
            let width = tensor.row_len();
            let segments: Vec<(usize, &[f64])> = match buf {
                GradBuf::Dense(g) => vec![(0, g.as_slice())],
                GradBuf::Rows(rows) => rows.iter().map(|(&r, g)| (r * width, g.as_slice())).collect(),
            };
            match self.kind {
                OptimizerKind::Sgd => {
                    let values = tensor.values_mut();
                    for (start, g) in segments {
                        for (k, gi) in g.iter().enumerate() {
                            values[start + k] -= self.lr * gi;
                        }
                    }
                }
                OptimizerKind::Adam => {
                    let len = tensor.len();
                    let (m, v) = self.moments.entry(id).or_insert_with(|| (vec![0.0; len], vec![0.0; len]));
                    let values = tensor.values_mut();
                    for (start, g) in segments {
                        for (k, &gi) in g.iter().enumerate() {
                            let i = start + k;
                            m[i] = BETA1 * m[i] + (1.0 - BETA1) * gi;
                            v[i] = BETA2 * v[i] + (1.0 - BETA2) * gi * gi;
                            let m_hat = m[i] / c1;
                            let v_hat = v[i] / c2;
                            values[i] -= self.lr * m_hat / (v_hat.sqrt() + EPS);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
