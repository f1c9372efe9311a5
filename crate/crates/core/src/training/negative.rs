use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Triple;
use crate::error::{Error, Result};

/// Draws `n_x` items uniformly from the items outside `positives`, by
/// rejection sampling.
pub fn sample_negative<R: Rng + ?Sized>(
    positives: &HashSet<usize>,
    n_items: usize,
    n_x: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let covered = positives.iter().filter(|&&v| v < n_items).count();
    if covered >= n_items {
        return Err(Error::Sampling(format!(
            "positive set covers all {n_items} items; no negative exists"
        )));
    }
    let mut out = Vec::with_capacity(n_x);
    while out.len() < n_x {
        let v = rng.gen_range(0..n_items);
        if !positives.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// One epoch of training triples for a task.
///
/// Positive pairs are shuffled; with a `budget` the shuffled pass is
/// repeated (reshuffling each time) until `budget` positives are drawn.
/// Each positive yields `n_x` triples with independent negatives.
pub fn build_triples<R: Rng + ?Sized>(
    pairs: &[(usize, usize)],
    positives: &[HashSet<usize>],
    n_items: usize,
    n_x: usize,
    budget: Option<usize>,
    rng: &mut R,
) -> Result<Vec<Triple>> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let total = budget.unwrap_or(pairs.len());
    let mut drawn = Vec::with_capacity(total);
    while drawn.len() < total {
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(rng);
        drawn.extend(order.into_iter().take(total - drawn.len()));
    }
    let mut triples = Vec::with_capacity(total * n_x);
    for i in drawn {
        let (entity, pos) = pairs[i];
        for neg in sample_negative(&positives[entity], n_items, n_x, rng)? {
            triples.push(Triple { entity, pos, neg });
        }
    }
    Ok(triples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn single_candidate() {
        let pos: HashSet<usize> = [0, 1].into_iter().collect();
        let mut rng = stream(1, &[]);
        assert_eq!(sample_negative(&pos, 3, 2, &mut rng).unwrap(), vec![2, 2]);
    }

    #[test]
    fn full_cover_is_error() {
        let pos: HashSet<usize> = (0..4).collect();
        let mut rng = stream(1, &[]);
        assert!(matches!(sample_negative(&pos, 4, 1, &mut rng), Err(Error::Sampling(_))));
    }

    #[test]
    fn never_collides() {
        let pos: HashSet<usize> = [1, 3, 5, 7].into_iter().collect();
        let mut rng = stream(2, &[]);
        for _ in 0..10_000 {
            let v = sample_negative(&pos, 9, 1, &mut rng).unwrap()[0];
            assert!(!pos.contains(&v) && v < 9);
        }
    }

    #[test]
    fn budget_and_negatives() {
        let pairs = vec![(0, 0), (1, 1), (0, 2)];
        let positives = vec![[0, 2].into_iter().collect(), [1].into_iter().collect()];
        let mut rng = stream(3, &[]);
        let t = build_triples(&pairs, &positives, 6, 2, None, &mut rng).unwrap();
        assert_eq!(t.len(), 6);
        let t = build_triples(&pairs, &positives, 6, 1, Some(7), &mut rng).unwrap();
        assert_eq!(t.len(), 7);
        for tr in &t {
            assert!(!positives[tr.entity].contains(&tr.neg));
        }
        assert!(build_triples(&[], &positives, 6, 1, None, &mut rng).unwrap().is_empty());
    }
}
