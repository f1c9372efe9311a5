use std::collections::BTreeMap;

use super::{ParamId, ParamStore};
use crate::error::{Error, Result};

/// Accumulated gradient for one tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum GradBuf {
    Dense(Vec<f64>),
    /// Row index to row gradient, for embedding tables.
    Rows(BTreeMap<usize, Vec<f64>>),
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Gradients keyed by parameter, produced by one or more backward passes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients {
    bufs: BTreeMap<ParamId, GradBuf>,
}

impl Gradients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_dense(&mut self, id: ParamId, g: &[f64]) {
        match self.bufs.get_mut(&id) {
            Some(GradBuf::Dense(buf)) => add_into(buf, g),
            Some(GradBuf::Rows(_)) => panic!("parameter {id:?} mixes dense and row gradients"),
            None => {
                self.bufs.insert(id, GradBuf::Dense(g.to_vec()));
            }
        }
    }

    pub fn add_row(&mut self, id: ParamId, row: usize, g: &[f64]) {
        let buf = self
            .bufs
            .entry(id)
            .or_insert_with(|| GradBuf::Rows(BTreeMap::new()));
        match buf {
            GradBuf::Rows(rows) => match rows.get_mut(&row) {
                Some(r) => add_into(r, g),
                None => {
                    rows.insert(row, g.to_vec());
                }
            },
            GradBuf::Dense(_) => panic!("parameter {id:?} mixes dense and row gradients"),
        }
    }

    /// Adds `other` into `self`.
    pub fn merge(&mut self, other: Gradients) {
        for (id, buf) in other.bufs {
            match buf {
                GradBuf::Dense(g) => self.add_dense(id, &g),
                GradBuf::Rows(rows) => {
                    for (r, g) in rows {
                        self.add_row(id, r, &g);
                    }
                }
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for buf in self.bufs.values_mut() {
            match buf {
                GradBuf::Dense(g) => g.iter_mut().for_each(|v| *v *= factor),
                GradBuf::Rows(rows) => rows
                    .values_mut()
                    .for_each(|g| g.iter_mut().for_each(|v| *v *= factor)),
            }
        }
    }

    pub fn get(&self, id: ParamId) -> Option<&GradBuf> {
        self.bufs.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &GradBuf)> {
        self.bufs.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.bufs.is_empty()
    }

    /// Full-size dense gradient for `id` (zeros where nothing accumulated).
    pub fn dense(&self, id: ParamId, store: &ParamStore) -> Vec<f64> {
        let t = store.tensor(id);
        let mut out = vec![0.0; t.len()];
        match self.bufs.get(&id) {
            Some(GradBuf::Dense(g)) => out.copy_from_slice(g),
            Some(GradBuf::Rows(rows)) => {
                let d = t.row_len();
                for (&r, g) in rows {
                    out[r * d..(r + 1) * d].copy_from_slice(g);
                }
            }
            None => {}
        }
        out
    }

    /// Fails on the first non-finite entry, naming the tensor.
    pub fn check_finite(&self, store: &ParamStore) -> Result<()> {
        for (id, buf) in &self.bufs {
            let finite = match buf {
                GradBuf::Dense(g) => g.iter().all(|v| v.is_finite()),
                GradBuf::Rows(rows) => rows.values().flatten().all(|v| v.is_finite()),
            };
            if !finite {
                return Err(Error::Numeric(format!(
                    "non-finite gradient for tensor {:?}",
                    store.get(*id).name
                )));
            }
        }
        Ok(())
    }
}
