use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    #[default]
    TwoStage,
    Joint,
    GroupOnly,
    UserOnly,
}

impl Strategy {
    /// Parses the CLI spelling (`two-stage`, `joint`, `group-only`, `user-only`).
    pub fn from_flag(s: &str) -> Option<Self> {
        Some(match s {
            "two-stage" => Strategy::TwoStage,
            "joint" => Strategy::Joint,
            "group-only" => Strategy::GroupOnly,
            "user-only" => Strategy::UserOnly,
            _ => return None,
        })
    }

    pub fn uses_users(self) -> bool {
        self != Strategy::GroupOnly
    }

    pub fn uses_groups(self) -> bool {
        self != Strategy::UserOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Negatives drawn per positive interaction.
    pub negatives: usize,
    /// Epochs per task stage (two-stage runs this many in each stage).
    pub epochs: usize,
    /// Overrides `epochs` for the user stage of two-stage training.
    pub stage1_epochs: Option<usize>,
    /// L2 coefficient on the parameters touched by a batch.
    pub lambda: f64,
    pub strategy: Strategy,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Positive user-item draws per epoch; `None` is one full pass.
    pub user_budget: Option<usize>,
    /// Positive group-item draws per epoch; `None` is one full pass.
    pub group_budget: Option<usize>,
    /// Stop when validation NDCG@10 has not improved for this many epochs.
    pub early_stopping_patience: Option<usize>,
    /// Record wall-clock seconds per epoch (otherwise reported as 0).
    pub record_timing: bool,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            batch_size: 256,
            negatives: 1,
            epochs: 20,
            stage1_epochs: None,
            lambda: 1e-5,
            strategy: Strategy::TwoStage,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            user_budget: None,
            group_budget: None,
            early_stopping_patience: None,
            record_timing: false,
            exec: Exec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return err("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return err("batch_size must be at least 1");
        }
        if self.negatives == 0 {
            return err("negatives must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return err("lambda must be non-negative");
        }
        if self.early_stopping_patience == Some(0) {
            return err("early_stopping_patience must be at least 1");
        }
        Ok(())
    }
}
