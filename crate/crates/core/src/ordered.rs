use std::collections::BTreeMap;

use crate::error::{input, Result};

/// Completes a partial injection on `0..n` to a permutation by matching the
/// unmapped sources and the missed targets in ascending order.
pub fn order_preserving_extension(n: usize, p: &BTreeMap<usize, usize>) -> Result<Vec<usize>> {
    let mut hit = vec![false; n];
    for (&x, &y) in p {
        if x >= n || y >= n {
            return input(format!("partial map {x} -> {y} leaves the carrier of size {n}"));
        }
        if std::mem::replace(&mut hit[y], true) {
            return input("partial map is not injective");
        }
    }
    let free_sources = (0..n).filter(|x| !p.contains_key(x));
    let free_targets = (0..n).filter(|&y| !hit[y]);
    let mut out = vec![0; n];
    for (&x, &y) in p {
        out[x] = y;
    }
    for (x, y) in free_sources.zip(free_targets) {
        out[x] = y;
    }
    Ok(out)
}

/// Composition `g ∘ f` of two permutations given as vectors.
pub fn compose_permutations(g: &[usize], f: &[usize]) -> Vec<usize> {
    f.iter().map(|&x| g[x]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmap(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn empty_map_extends_to_identity() {
        assert_eq!(order_preserving_extension(3, &pmap(&[])).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn single_pair_gives_transposition() {
        assert_eq!(order_preserving_extension(2, &pmap(&[(0, 1)])).unwrap(), vec![1, 0]);
    }

    #[test]
    fn two_pairs_give_three_cycle() {
        // 2 -> 3, 3 -> 1 on {1,2,3}; the free source 1 goes to the free target 2
        assert_eq!(order_preserving_extension(3, &pmap(&[(1, 2), (2, 0)])).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn non_injective_input_is_rejected() {
        assert!(order_preserving_extension(3, &pmap(&[(0, 1), (2, 1)])).is_err());
        assert!(order_preserving_extension(2, &pmap(&[(0, 5)])).is_err());
    }
}
