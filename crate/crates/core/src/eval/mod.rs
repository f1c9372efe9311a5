//! Full-ranking evaluation: HR@N and NDCG@N over all items, stratified
//! reports and the popularity baseline.

mod report;

pub use report::{EvalReport, Metric, Stratum, Strata};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::data::InteractionDataset;
use crate::error::{Error, Result};
use crate::model::{self, Context, ItemScorer};
use crate::par::{self, Exec};

/// Which scorer a test split is routed through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    Groups,
    Users,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "groups" => Ok(Target::Groups),
            "users" => Ok(Target::Users),
            other => Err(Error::Config(format!("unknown target {other:?} (expected groups or users)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub cutoffs: Vec<usize>,
    pub target: Target,
    /// Neighbor-sampling seed for inference embeddings.
    pub seed: u64,
    /// Remove each entity's training positives (other than the ground
    /// truth) from its candidate list.
    pub exclude_train: bool,
    pub strata: bool,
    pub exec: Exec,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cutoffs: vec![5, 10],
            target: Target::Groups,
            seed: 0,
            exclude_train: false,
            strata: false,
            exec: Exec::default(),
        }
    }
}

/// One test interaction and the 1-based rank of its ground-truth item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCase {
    pub entity: usize,
    pub item: usize,
    pub rank: usize,
}

/// Item indices by descending score, ties by ascending index.
pub fn rank_items(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// 1-based position of `gt` in [`rank_items`] order, skipping `excluded`.
pub fn rank_of(scores: &[f64], gt: usize, excluded: Option<&HashSet<usize>>) -> usize {
    let s = scores[gt];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(j, &x)| {
            j != gt && (x > s || (x == s && j < gt)) && !excluded.is_some_and(|e| e.contains(&j))
        })
        .count()
}

fn check_cases(cases: &[RankedCase], n: usize) -> Result<()> {
    if cases.is_empty() {
        return Err(Error::Contract("empty test set".into()));
    }
    if n == 0 {
        return Err(Error::Contract("cutoff must be at least 1".into()));
    }
    Ok(())
}

/// Fraction of cases whose ground truth lands in the top `n`.
pub fn hit_ratio(cases: &[RankedCase], n: usize) -> Result<f64> {
    check_cases(cases, n)?;
    let hits = cases.iter().filter(|c| c.rank <= n).count();
    Ok(hits as f64 / cases.len() as f64)
}

/// Per-case NDCG with one relevant item: `1 / log2(rank + 1)` inside the cutoff.
pub fn case_ndcg(rank: usize, n: usize) -> f64 {
    if rank <= n {
        1.0 / ((rank + 1) as f64).log2()
    } else {
        0.0
    }
}

pub fn ndcg(cases: &[RankedCase], n: usize) -> Result<f64> {
    check_cases(cases, n)?;
    let total: f64 = cases.iter().map(|c| case_ndcg(c.rank, n)).sum();
    Ok(total / cases.len() as f64)
}

/// Items by descending training popularity (group-item plus user-item
/// interactions), ties by ascending index.
pub fn pop_baseline(train: &InteractionDataset) -> Vec<usize> {
    rank_items(&popularity(train))
}

fn popularity(train: &InteractionDataset) -> Vec<f64> {
    let mut counts = vec![0.0; train.num_items];
    for &(_, v) in train.group_item.iter().chain(&train.user_item) {
        counts[v] += 1.0;
    }
    counts
}

fn test_pairs(test: &InteractionDataset, target: Target) -> &[(usize, usize)] {
    match target {
        Target::Groups => &test.group_item,
        Target::Users => &test.user_item,
    }
}

fn train_positives(train: &InteractionDataset, target: Target) -> Vec<HashSet<usize>> {
    match target {
        Target::Groups => train.group_positives(),
        Target::Users => train.user_positives(),
    }
}

/// Groups the test pairs by entity, keeping first-seen entity order.
fn by_entity(pairs: &[(usize, usize)]) -> Vec<(usize, Vec<usize>)> {
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    for &(e, v) in pairs {
        let slot = *index.entry(e).or_insert_with(|| {
            out.push((e, Vec::new()));
            out.len() - 1
        });
        out[slot].1.push(v);
    }
    out
}

/// Ranks every test case of `test` under the model. Cases are returned in
/// the order of the test split.
pub fn rank_cases(ctx: Context<'_>, test: &InteractionDataset, train: &InteractionDataset, opts: &EvalOptions) -> Result<Vec<RankedCase>> {
    let pairs = test_pairs(test, opts.target);
    let groups = by_entity(pairs);
    let entities: Vec<usize> = groups.iter().map(|(e, _)| *e).collect();
    let (embeddings, tower) = match opts.target {
        Target::Groups => (
            model::embed_groups(ctx, opts.seed, &entities, opts.exec)?,
            &ctx.params.group_tower,
        ),
        Target::Users => (
            model::embed_users(ctx, opts.seed, &entities, opts.exec)?,
            ctx.params
                .user_tower
                .as_ref()
                .ok_or_else(|| Error::Config("model has no user tower; cannot evaluate users".into()))?,
        ),
    };
    let positives = opts.exclude_train.then(|| train_positives(train, opts.target));
    let scorer = ItemScorer::new(ctx.params, tower);
    let work: Vec<usize> = (0..groups.len()).collect();
    let ranked = par::map(opts.exec, &work, |&i| -> Result<Vec<RankedCase>> {
        let (entity, items) = &groups[i];
        let scores = scorer.score_all(&embeddings[i])?;
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Numeric(format!("non-finite score for entity {entity}")));
        }
        Ok(items
            .iter()
            .map(|&item| {
                let excluded = positives.as_ref().map(|p| {
                    let mut set = p[*entity].clone();
                    set.remove(&item);
                    set
                });
                RankedCase { entity: *entity, item, rank: rank_of(&scores, item, excluded.as_ref()) }
            })
            .collect())
    });
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for cases in ranked {
        for c in cases? {
            by_pair.insert((c.entity, c.item), c.rank);
        }
    }
    Ok(pairs
        .iter()
        .map(|&(entity, item)| RankedCase { entity, item, rank: by_pair[&(entity, item)] })
        .collect())
}

/// Runs the full protocol and summarizes it.
pub fn evaluate(ctx: Context<'_>, test: &InteractionDataset, train: &InteractionDataset, opts: &EvalOptions) -> Result<EvalReport> {
    let cases = rank_cases(ctx, test, train, opts)?;
    summarize(&cases, test, train, opts)
}

/// Evaluates a fixed global ranking (the popularity baseline) with the
/// same protocol.
pub fn evaluate_pop(test: &InteractionDataset, train: &InteractionDataset, opts: &EvalOptions) -> Result<EvalReport> {
    let scores = popularity(train);
    let positives = opts.exclude_train.then(|| train_positives(train, opts.target));
    let cases: Vec<RankedCase> = test_pairs(test, opts.target)
        .iter()
        .map(|&(entity, item)| {
            let excluded = positives.as_ref().map(|p| {
                let mut set = p[entity].clone();
                set.remove(&item);
                set
            });
            RankedCase { entity, item, rank: rank_of(&scores, item, excluded.as_ref()) }
        })
        .collect();
    summarize(&cases, test, train, opts)
}

/// Aggregates ranked cases into a report.
pub fn summarize(cases: &[RankedCase], test: &InteractionDataset, train: &InteractionDataset, opts: &EvalOptions) -> Result<EvalReport> {
    let metrics = metrics_for(cases, &opts.cutoffs)?;
    let strata = if opts.strata {
        let activity = item_activity(train);
        let mut size_bins: BTreeMap<&str, Vec<RankedCase>> = BTreeMap::new();
        let mut activity_bins: BTreeMap<&str, Vec<RankedCase>> = BTreeMap::new();
        for c in cases {
            if opts.target == Target::Groups {
                size_bins.entry(size_bin(test.group_size(c.entity))).or_default().push(*c);
            }
            activity_bins.entry(activity_bin(activity[c.item])).or_default().push(*c);
        }
        let to_strata = |bins: BTreeMap<&str, Vec<RankedCase>>| -> Result<BTreeMap<String, Stratum>> {
            bins.into_iter()
                .map(|(k, v)| Ok((k.to_string(), Stratum { num_cases: v.len(), metrics: metrics_for(&v, &opts.cutoffs)? })))
                .collect()
        };
        Some(Strata { group_size: to_strata(size_bins)?, item_activity: to_strata(activity_bins)? })
    } else {
        None
    };
    Ok(EvalReport { target: opts.target, num_test_cases: cases.len(), metrics, strata })
}

fn metrics_for(cases: &[RankedCase], cutoffs: &[usize]) -> Result<BTreeMap<usize, Metric>> {
    cutoffs
        .iter()
        .map(|&n| Ok((n, Metric { hr: hit_ratio(cases, n)?, ndcg: ndcg(cases, n)? })))
        .collect()
}

/// Group-size bin labels.
pub fn size_bin(l: usize) -> &'static str {
    match l {
        0..=2 => "l<3",
        3..=7 => "3<=l<=7",
        _ => "l>7",
    }
}

/// Item-activity bin labels, keyed on the training group-item count.
pub fn activity_bin(tau: usize) -> &'static str {
    if tau <= 3 {
        "tau<=3"
    } else {
        "tau>3"
    }
}

/// Training group-item interactions per item.
pub fn item_activity(train: &InteractionDataset) -> Vec<usize> {
    let mut counts = vec![0; train.num_items];
    for &(_, v) in &train.group_item {
        counts[v] += 1;
    }
    counts
}
