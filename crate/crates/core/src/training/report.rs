use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Strategy;

/// Which task(s) an epoch trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    User,
    Group,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub stage: Stage,
    /// Triple-weighted mean batch loss of the group task, if it ran.
    pub loss_g: Option<f64>,
    pub loss_u: Option<f64>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub val_ndcg10: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainReport {
    pub strategy: Strategy,
    pub epochs: Vec<EpochRecord>,
    /// Mean pair loss of the first group batch, before its update.
    pub initial_pair_loss_g: Option<f64>,
    /// Regularizer of that batch.
    pub initial_reg_g: Option<f64>,
    pub initial_pair_loss_u: Option<f64>,
    pub initial_reg_u: Option<f64>,
    pub optimizer_steps: u64,
    pub best_val_ndcg10: Option<f64>,
    pub stopped_early: bool,
    pub checkpoint: Option<String>,
}

impl TrainReport {
    /// `epoch,loss_g,loss_u,seconds`, with empty cells for tasks that did
    /// not run in an epoch.
    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("epoch,loss_g,loss_u,seconds\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{},{},{},{}", e.epoch, cell(e.loss_g), cell(e.loss_u), e.seconds);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Group-task losses in epoch order.
    pub fn group_losses(&self) -> Vec<f64> {
        self.epochs.iter().filter_map(|e| e.loss_g).collect()
    }

    pub fn user_losses(&self) -> Vec<f64> {
        self.epochs.iter().filter_map(|e| e.loss_u).collect()
    }
}
