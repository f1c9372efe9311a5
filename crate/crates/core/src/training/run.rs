use std::collections::HashSet;
use std::time::Instant;

use super::loss::{batch_loss, Task, Triple};
use super::negative::build_triples;
use super::report::{EpochRecord, Stage, TrainReport};
use super::{Optimizer, Strategy, TrainConfig};
use crate::data::InteractionDataset;
use crate::error::{Error, Result};
use crate::eval::{self, EvalOptions, Target};
use crate::graph::Graphs;
use crate::model::{Context, ModelConfig, ModelParams};
use crate::numeric::ParamStore;
use crate::rng::{derive_seed, stream, tag};

/// Trains `params` in place with the strategy named in `cfg`.
///
/// `validation` is only read when early stopping is enabled.
pub fn train(
    params: &mut ModelParams,
    model_cfg: &ModelConfig,
    graphs: &Graphs,
    train_ds: &InteractionDataset,
    validation: Option<&InteractionDataset>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    let strategy = effective_strategy(model_cfg, cfg)?;
    run(params, model_cfg, graphs, train_ds, validation, cfg, strategy)
}

/// User stage, then group stage fine-tuning the shared tensors.
pub fn train_two_stage(
    params: &mut ModelParams,
    model_cfg: &ModelConfig,
    graphs: &Graphs,
    train_ds: &InteractionDataset,
    validation: Option<&InteractionDataset>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if !model_cfg.variant.has_user_task() {
        return Err(Error::Config("two-stage training needs the user task".into()));
    }
    run(params, model_cfg, graphs, train_ds, validation, cfg, Strategy::TwoStage)
}

/// One user batch and one group batch per iteration.
pub fn train_joint(
    params: &mut ModelParams,
    model_cfg: &ModelConfig,
    graphs: &Graphs,
    train_ds: &InteractionDataset,
    validation: Option<&InteractionDataset>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if !model_cfg.variant.has_user_task() {
        return Err(Error::Config("joint training needs the user task".into()));
    }
    run(params, model_cfg, graphs, train_ds, validation, cfg, Strategy::Joint)
}

fn effective_strategy(model_cfg: &ModelConfig, cfg: &TrainConfig) -> Result<Strategy> {
    if model_cfg.variant.has_user_task() {
        return Ok(cfg.strategy);
    }
    match cfg.strategy {
        Strategy::UserOnly => Err(Error::Config("variant without the user task cannot train USER_ONLY".into())),
        Strategy::GroupOnly => Ok(Strategy::GroupOnly),
        other => {
            log::warn!("variant without the user task: {other:?} reduced to GROUP_ONLY");
            Ok(Strategy::GroupOnly)
        }
    }
}

struct Runner<'a> {
    model_cfg: &'a ModelConfig,
    graphs: &'a Graphs,
    train: &'a InteractionDataset,
    validation: Option<&'a InteractionDataset>,
    cfg: &'a TrainConfig,
    opt: Optimizer,
    report: TrainReport,
    user_pos: Vec<HashSet<usize>>,
    group_pos: Vec<HashSet<usize>>,
    best: Option<(f64, ParamStore)>,
    since_best: usize,
    epoch: usize,
}

fn task_code(task: Task) -> u64 {
    match task {
        Task::User => 0,
        Task::Group => 1,
    }
}

impl Runner<'_> {
    fn triples(&self, task: Task, epoch: usize) -> Result<Vec<Triple>> {
        let mut rng = stream(self.cfg.seed, &[tag::NEGATIVES, task_code(task), epoch as u64]);
        let n = self.train.num_items;
        match task {
            Task::User => build_triples(&self.train.user_item, &self.user_pos, n, self.cfg.negatives, self.cfg.user_budget, &mut rng),
            Task::Group => build_triples(&self.train.group_item, &self.group_pos, n, self.cfg.negatives, self.cfg.group_budget, &mut rng),
        }
    }

    /// One optimizer step; returns the batch loss measured before it.
    fn step(&mut self, params: &mut ModelParams, task: Task, batch: &[Triple], index: usize) -> Result<f64> {
        let seed = derive_seed(self.cfg.seed, &[tag::PASS, task_code(task), self.epoch as u64, index as u64]);
        let ctx = Context { params, cfg: self.model_cfg, social: &self.graphs.social, hyper: &self.graphs.hyper };
        let out = batch_loss(ctx, task, batch, self.cfg.lambda, seed, true, self.cfg.exec)?;
        if !out.loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite {task:?} loss at epoch {}", self.epoch)));
        }
        let (pair, reg) = match task {
            Task::Group => (&mut self.report.initial_pair_loss_g, &mut self.report.initial_reg_g),
            Task::User => (&mut self.report.initial_pair_loss_u, &mut self.report.initial_reg_u),
        };
        if pair.is_none() {
            *pair = Some(out.pair_loss);
            *reg = Some(out.reg);
        }
        self.opt.step(&mut params.store, &out.grads)?;
        Ok(out.loss)
    }

    fn batches(&self, triples: &[Triple]) -> Vec<(usize, usize)> {
        let b = self.cfg.batch_size;
        (0..triples.len()).step_by(b).map(|s| (s, (s + b).min(triples.len()))).collect()
    }

    /// Runs one epoch of the given tasks; in joint mode batches alternate
    /// user, group, user, group, ...
    fn epoch(&mut self, params: &mut ModelParams, tasks: &[Task], stage: Stage) -> Result<bool> {
        let start = Instant::now();
        let mut work = Vec::new();
        for &task in tasks {
            let triples = self.triples(task, self.epoch)?;
            let batches = self.batches(&triples);
            work.push((task, triples, batches));
        }
        let mut sums = [(0.0, 0usize); 2];
        let rounds = work.iter().map(|w| w.2.len()).max().unwrap_or(0);
        for i in 0..rounds {
            for (task, triples, batches) in &work {
                if let Some(&(s, e)) = batches.get(i) {
                    let loss = self.step(params, *task, &triples[s..e], i)?;
                    let acc = &mut sums[task_code(*task) as usize];
                    acc.0 += loss * (e - s) as f64;
                    acc.1 += e - s;
                }
            }
        }
        let mean = |(total, n): (f64, usize)| (n > 0).then(|| total / n as f64);
        let mut record = EpochRecord {
            epoch: self.epoch,
            stage,
            loss_g: mean(sums[1]),
            loss_u: mean(sums[0]),
            seconds: if self.cfg.record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
            val_ndcg10: None,
        };
        let stop = if tasks.contains(&Task::Group) { self.early_stop_check(params, &mut record)? } else { false };
        log::info!(
            "epoch {} ({stage:?}): loss_g={:?} loss_u={:?}",
            self.epoch,
            record.loss_g,
            record.loss_u
        );
        self.report.epochs.push(record);
        self.epoch += 1;
        Ok(stop)
    }

    fn early_stop_check(&mut self, params: &ModelParams, record: &mut EpochRecord) -> Result<bool> {
        let (Some(patience), Some(val)) = (self.cfg.early_stopping_patience, self.validation) else {
            return Ok(false);
        };
        if val.group_item.is_empty() {
            return Ok(false);
        }
        let ctx = Context { params, cfg: self.model_cfg, social: &self.graphs.social, hyper: &self.graphs.hyper };
        let opts = EvalOptions { cutoffs: vec![10], target: Target::Groups, seed: self.cfg.seed, exec: self.cfg.exec, ..Default::default() };
        let score = eval::evaluate(ctx, val, self.train, &opts)?.metrics[&10].ndcg;
        record.val_ndcg10 = Some(score);
        if self.best.as_ref().is_none_or(|(b, _)| score > *b) {
            self.best = Some((score, params.store.clone()));
            self.since_best = 0;
            Ok(false)
        } else {
            self.since_best += 1;
            Ok(self.since_best >= patience)
        }
    }
}

fn run(
    params: &mut ModelParams,
    model_cfg: &ModelConfig,
    graphs: &Graphs,
    train_ds: &InteractionDataset,
    validation: Option<&InteractionDataset>,
    cfg: &TrainConfig,
    strategy: Strategy,
) -> Result<TrainReport> {
    cfg.validate()?;
    if params.num_users() != train_ds.num_users || params.num_items() != train_ds.num_items {
        return Err(Error::Dimension(format!(
            "model has {} users / {} items, dataset has {} / {}",
            params.num_users(),
            params.num_items(),
            train_ds.num_users,
            train_ds.num_items
        )));
    }
    let mut r = Runner {
        model_cfg,
        graphs,
        train: train_ds,
        validation,
        cfg,
        opt: Optimizer::new(cfg.optimizer, cfg.learning_rate),
        report: TrainReport { strategy, ..Default::default() },
        user_pos: train_ds.user_positives(),
        group_pos: train_ds.group_positives(),
        best: None,
        since_best: 0,
        epoch: 0,
    };
    let mut user = strategy.uses_users();
    let mut group = strategy.uses_groups();
    if user && train_ds.user_item.is_empty() {
        log::warn!("no user-item training interactions; user task skipped");
        user = false;
    }
    if group && train_ds.group_item.is_empty() {
        log::warn!("no group-item training interactions; group task skipped");
        group = false;
    }
    let mut stopped = false;
    match strategy {
        Strategy::TwoStage => {
            if user {
                for _ in 0..cfg.stage1_epochs.unwrap_or(cfg.epochs) {
                    r.epoch(params, &[Task::User], Stage::User)?;
                }
            }
            if group {
                for _ in 0..cfg.epochs {
                    if r.epoch(params, &[Task::Group], Stage::Group)? {
                        stopped = true;
                        break;
                    }
                }
            }
        }
        _ => {
            let (tasks, stage) = match (user, group) {
                (true, true) => (vec![Task::User, Task::Group], Stage::Joint),
                (true, false) => (vec![Task::User], Stage::User),
                (false, true) => (vec![Task::Group], Stage::Group),
                (false, false) => (vec![], Stage::Joint),
            };
            if !tasks.is_empty() {
                for _ in 0..cfg.epochs {
                    if r.epoch(params, &tasks, stage)? {
                        stopped = true;
                        break;
                    }
                }
            }
        }
    }
    if let Some((score, store)) = r.best.take() {
        params.store = store;
        r.report.best_val_ndcg10 = Some(score);
    }
    r.report.stopped_early = stopped;
    r.report.optimizer_steps = r.opt.steps();
    Ok(r.report)
}
