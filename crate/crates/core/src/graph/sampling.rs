use rand::Rng;

/// Draws exactly `s` positions from `0..pool_len`.
///
/// Without replacement when `pool_len >= s`, with replacement when the
/// pool is smaller, `None` when the pool is empty.
pub fn sample_indices<R: Rng + ?Sized>(pool_len: usize, s: usize, rng: &mut R) -> Option<Vec<usize>> {
    if pool_len == 0 {
        return None;
    }
    if pool_len >= s {
        Some(rand::seq::index::sample(rng, pool_len, s).into_vec())
    } else {
        Some((0..s).map(|_| rng.gen_range(0..pool_len)).collect())
    }
}

/// Fixed-size neighbor sample; an isolated node samples itself `s` times.
pub fn sample_neighbors<R: Rng + ?Sized>(pool: &[usize], node_self: usize, s: usize, rng: &mut R) -> Vec<usize> {
    match sample_indices(pool.len(), s, rng) {
        Some(idx) => idx.into_iter().map(|i| pool[i]).collect(),
        None => vec![node_self; s],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use std::collections::HashSet;

    #[test]
    fn small_pool_with_replacement() {
        let out = sample_neighbors(&[7, 9], 0, 4, &mut stream(1, &[]));
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|x| [7, 9].contains(x)));
    }

    #[test]
    fn empty_pool_samples_self() {
        assert_eq!(sample_neighbors(&[], 5, 3, &mut stream(1, &[])), vec![5, 5, 5]);
    }

    #[test]
    fn large_pool_without_replacement_replays() {
        let pool: Vec<usize> = (10..20).collect();
        let a = sample_neighbors(&pool, 0, 4, &mut stream(42, &[3]));
        let b = sample_neighbors(&pool, 0, 4, &mut stream(42, &[3]));
        assert_eq!(a, b);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 4);
        assert!(a.iter().all(|x| pool.contains(x)));
    }
}
