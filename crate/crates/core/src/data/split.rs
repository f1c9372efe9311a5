use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::InteractionDataset;
use crate::error::{Error, Result};
use crate::rng::{stream, tag};

/// Train/validation/test ratios plus the shuffling seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub test_ratio: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_ratio: 0.8,
            val_ratio: 0.1,
            test_ratio: 0.1,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("train_ratio", self.train_ratio),
            ("val_ratio", self.val_ratio),
            ("test_ratio", self.test_ratio),
        ] {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Config(format!("{name} = {r} is outside (0, 1)")));
            }
        }
        let sum = self.train_ratio + self.val_ratio + self.test_ratio;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: InteractionDataset,
    pub val: InteractionDataset,
    pub test: InteractionDataset,
}

// floor with a little slack so that e.g. 0.29 * 100 yields 29
fn portion(n: usize, ratio: f64) -> usize {
    ((n as f64) * ratio + 1e-9).floor() as usize
}

fn partition<T: Copy>(
    pairs: &[T],
    spec: &SplitSpec,
    seed_tag: u64,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut stream(spec.seed, &[seed_tag]));
    let n_val = portion(pairs.len(), spec.val_ratio);
    let n_test = portion(pairs.len(), spec.test_ratio);
    let n_train = pairs.len() - n_val - n_test;
    let pick = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pairs[i]).collect::<Vec<_>>()
    };
    (
        pick(&order[..n_train]),
        pick(&order[n_train..n_train + n_val]),
        pick(&order[n_train + n_val..]),
    )
}

/// Randomly partitions the user-item and group-item interactions,
/// independently, by the ratios in `spec`.
///
/// Validation and test receive `floor(n * ratio)` interactions each; the
/// remainder goes to train. Social edges and memberships are copied into
/// every split. Within a split, interactions keep their input order.
pub fn split_interactions(ds: &InteractionDataset, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let (gi_train, gi_val, gi_test) = partition(&ds.group_item, spec, tag::SPLIT_GROUP_ITEM);
    let (ui_train, ui_val, ui_test) = partition(&ds.user_item, spec, tag::SPLIT_USER_ITEM);
    if ds.group_item.len() >= 10 {
        for (name, part) in [("train", &gi_train), ("validation", &gi_val), ("test", &gi_test)] {
            if part.is_empty() {
                log::warn!("{name} split received no group-item interactions");
            }
        }
    }
    Ok(Splits {
        train: ds.with_interactions(ui_train, gi_train),
        val: ds.with_interactions(ui_val, gi_val),
        test: ds.with_interactions(ui_test, gi_test),
    })
}
