use rand::Rng;

use super::config::ModelConfig;
use crate::error::{Error, Result};
use crate::numeric::{ParamId, ParamStore, Tensor};
use crate::rng::{stream, tag};

/// One MLP scorer: hidden `(weight, bias)` layers and an output row vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub hidden: Vec<(ParamId, ParamId)>,
    pub output: ParamId,
}

/// All model tensors plus handles into the store.
///
/// The user latent table and the item table are shared by both towers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub store: ParamStore,
    /// Frozen input features, present when the social GNN is active.
    pub node_features: Option<ParamId>,
    pub user_latent: ParamId,
    pub item_embeddings: ParamId,
    pub ipm: Vec<ParamId>,
    pub hrl: Vec<ParamId>,
    pub group_tower: Tower,
    pub user_tower: Option<Tower>,
}

fn uniform(shape: Vec<usize>, limit: f64, seed: u64, index: u64) -> Tensor {
    let mut rng = stream(seed, &[tag::INIT, index]);
    Tensor::from_fn(shape, |_| rng.gen_range(-limit..limit))
}

fn glorot(shape: Vec<usize>, seed: u64, index: u64) -> Tensor {
    let limit = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
    uniform(shape, limit, seed, index)
}

/// Expected `(name, shape, trainable, row_sparse)` layout for a config.
fn layout(cfg: &ModelConfig, num_users: usize, num_items: usize) -> Vec<(String, Vec<usize>, bool, bool)> {
    let d = cfg.dim;
    let mut out = Vec::new();
    if cfg.variant.uses_ipm() {
        out.push(("node_features".to_string(), vec![num_users, d], false, true));
    }
    out.push(("user_latent".into(), vec![num_users, d], true, true));
    out.push(("item_embeddings".into(), vec![num_items, d], true, true));
    if cfg.variant.uses_ipm() {
        for i in 0..cfg.ipm_layers {
            out.push((format!("ipm.{i}.weight"), vec![d, 2 * d], true, false));
        }
    }
    if cfg.variant.uses_hrl() {
        for i in 0..cfg.hrl_layers {
            out.push((format!("hrl.{i}.weight"), vec![d, 2 * d], true, false));
        }
    }
    let towers: &[&str] = if cfg.variant.has_user_task() {
        &["group_mlp", "user_mlp"]
    } else {
        &["group_mlp"]
    };
    for tower in towers {
        let mut width = 2 * d;
        for (j, &h) in cfg.hidden_widths().iter().enumerate() {
            out.push((format!("{tower}.{j}.weight"), vec![h, width], true, false));
            out.push((format!("{tower}.{j}.bias"), vec![h], true, false));
            width = h;
        }
        out.push((format!("{tower}.out"), vec![1, width], true, false));
    }
    out
}

impl ModelParams {
    /// Fresh parameters: Glorot-uniform weights and frozen features,
    /// zero biases, small uniform embeddings, zero output projections when
    /// `zero_init_output` is set.
    pub fn init(cfg: &ModelConfig, num_users: usize, num_items: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.dim;
        let emb_limit = 1.0 / (d as f64).sqrt();
        let mut store = ParamStore::new();
        for (i, (name, shape, trainable, sparse)) in layout(cfg, num_users, num_items).into_iter().enumerate() {
            let idx = i as u64;
            let tensor = if name == "user_latent" || name == "item_embeddings" {
                uniform(shape, emb_limit, seed, idx)
            } else if name.ends_with(".bias") || (name.ends_with(".out") && cfg.zero_init_output) {
                Tensor::zeros(shape)
            } else {
                glorot(shape, seed, idx)
            };
            store.add(name, tensor, trainable, sparse);
        }
        Self::from_store(cfg, store)
    }

    /// Resolves tensor handles by name, checking every shape against `cfg`.
    pub fn from_store(cfg: &ModelConfig, store: ParamStore) -> Result<Self> {
        cfg.validate()?;
        let latent = store
            .find("user_latent")
            .ok_or_else(|| Error::Dimension("missing tensor user_latent".into()))?;
        let items = store
            .find("item_embeddings")
            .ok_or_else(|| Error::Dimension("missing tensor item_embeddings".into()))?;
        let num_users = store.tensor(latent).shape()[0];
        let num_items = store.tensor(items).shape()[0];
        let expected = layout(cfg, num_users, num_items);
        if expected.len() != store.len() {
            return Err(Error::Dimension(format!(
                "store has {} tensors, config expects {}",
                store.len(),
                expected.len()
            )));
        }
        for (name, shape, _, _) in &expected {
            let id = store
                .find(name)
                .ok_or_else(|| Error::Dimension(format!("missing tensor {name}")))?;
            if store.tensor(id).shape() != shape.as_slice() {
                return Err(Error::Dimension(format!(
                    "tensor {name} has shape {:?}, config expects {shape:?}",
                    store.tensor(id).shape()
                )));
            }
        }
        let get = |name: String| store.find(&name).expect("checked above");
        let tower = |prefix: &str| Tower {
            hidden: (0..cfg.hidden_widths().len())
                .map(|j| (get(format!("{prefix}.{j}.weight")), get(format!("{prefix}.{j}.bias"))))
                .collect(),
            output: get(format!("{prefix}.out")),
        };
        Ok(ModelParams {
            node_features: store.find("node_features"),
            user_latent: latent,
            item_embeddings: items,
            ipm: if cfg.variant.uses_ipm() {
                (0..cfg.ipm_layers).map(|i| get(format!("ipm.{i}.weight"))).collect()
            } else {
                Vec::new()
            },
            hrl: if cfg.variant.uses_hrl() {
                (0..cfg.hrl_layers).map(|i| get(format!("hrl.{i}.weight"))).collect()
            } else {
                Vec::new()
            },
            group_tower: tower("group_mlp"),
            user_tower: cfg.variant.has_user_task().then(|| tower("user_mlp")),
            store,
        })
    }

    pub fn num_users(&self) -> usize {
        self.store.tensor(self.user_latent).shape()[0]
    }

    pub fn num_items(&self) -> usize {
        self.store.tensor(self.item_embeddings).shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.store.tensor(self.user_latent).shape()[1]
    }

    /// Replaces the frozen input features (e.g. precomputed embeddings).
    pub fn set_node_features(&mut self, features: Tensor) -> Result<()> {
        let id = self
            .node_features
            .ok_or_else(|| Error::Config("variant has no node features".into()))?;
        if features.shape() != self.store.tensor(id).shape() {
            return Err(Error::Dimension(format!(
                "features of shape {:?}, expected {:?}",
                features.shape(),
                self.store.tensor(id).shape()
            )));
        }
        *self.store.tensor_mut(id) = features;
        Ok(())
    }

    /// Every tensor belonging to `tower`.
    pub fn tower_tensors(tower: &Tower) -> Vec<ParamId> {
        tower
            .hidden
            .iter()
            .flat_map(|&(w, b)| [w, b])
            .chain(std::iter::once(tower.output))
            .collect()
    }
}
