use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which components of the model are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    /// Social GNN + hyperedge GNN, both towers.
    #[default]
    Full,
    /// Member embeddings are the latent vectors alone (no social GNN).
    NoIpm,
    /// Group embedding is the member average (no hyperedge GNN).
    NoHrl,
    /// Neither GNN.
    NoBoth,
    /// No user tower; trained on group-item data only.
    NoUserTask,
}

impl Variant {
    pub fn uses_ipm(self) -> bool {
        !matches!(self, Variant::NoIpm | Variant::NoBoth)
    }

    pub fn uses_hrl(self) -> bool {
        !matches!(self, Variant::NoHrl | Variant::NoBoth)
    }

    pub fn has_user_task(self) -> bool {
        self != Variant::NoUserTask
    }

    /// Short CLI names: `full`, `s`, `h`, `sh`, `u`.
    pub fn from_short(name: &str) -> Option<Self> {
        Some(match name {
            "full" => Variant::Full,
            "s" => Variant::NoIpm,
            "h" => Variant::NoHrl,
            "sh" => Variant::NoBoth,
            "u" => Variant::NoUserTask,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Embedding dimension `d`.
    pub dim: usize,
    pub ipm_layers: usize,
    pub hrl_layers: usize,
    /// Neighbors sampled per user per social GNN layer.
    pub ipm_samples: usize,
    /// Incident hyperedges sampled per group per hyperedge GNN layer.
    pub hrl_samples: usize,
    /// Hidden widths of both MLP towers; `None` means `[d, d/2]`.
    pub mlp_hidden: Option<Vec<usize>>,
    pub dropout: f64,
    /// Weight of the hyperedge embedding in the residual fusion.
    pub residual_w: f64,
    pub variant: Variant,
    /// Divide overlap weights by their sum over the sampled neighbors.
    pub normalize_overlap: bool,
    /// Start the towers' output projections at zero.
    pub zero_init_output: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 128,
            ipm_layers: 1,
            hrl_layers: 2,
            ipm_samples: 4,
            hrl_samples: 4,
            mlp_hidden: None,
            dropout: 0.1,
            residual_w: 0.5,
            variant: Variant::Full,
            normalize_overlap: false,
            zero_init_output: true,
        }
    }
}

impl ModelConfig {
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.mlp_hidden
            .clone()
            .unwrap_or_else(|| vec![self.dim, (self.dim / 2).max(1)])
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim == 0 {
            return err("dim must be at least 1");
        }
        if self.variant.uses_ipm() && (self.ipm_layers == 0 || self.ipm_samples == 0) {
            return err("social GNN needs ipm_layers >= 1 and ipm_samples >= 1");
        }
        if self.variant.uses_hrl() && (self.hrl_layers == 0 || self.hrl_samples == 0) {
            return err("hyperedge GNN needs hrl_layers >= 1 and hrl_samples >= 1");
        }
        if !(0.0..=1.0).contains(&self.residual_w) {
            return err("residual_w must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return err("dropout must lie in [0, 1)");
        }
        if self.hidden_widths().contains(&0) {
            return err("MLP hidden widths must be positive");
        }
        Ok(())
    }
}
