//! The left-to-right greedy matching `M*` and a brute-force reference.

use crate::error::{Error, Result};
use crate::model::{self, Instance, Matching};
use crate::rational::Rational;

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub matching: Matching,
    /// `cost_per_k[k - 1]` is `SC_k` of `matching`.
    pub cost_per_k: Vec<Rational>,
}

impl OptResult {
    pub fn cost(&self, k: usize) -> &Rational {
        &self.cost_per_k[k - 1]
    }
}

/// Matches the i-th agent from the left to the i-th item from the left,
/// both sides sorted by `(coordinate, id)`. Optimal for every `SC_k` at once.
pub fn greedy_optimal(instance: &Instance) -> OptResult {
    let agents = instance.agents_left_to_right();
    let items = instance.items_left_to_right();
    let mut item_of = vec![0; instance.n()];
    for (&a, &g) in agents.iter().zip(&items) {
        item_of[a] = g;
    }
    let matching = Matching::new(item_of).expect("rank-for-rank is a bijection");
    let cost_per_k = model::cost_per_k(instance, &matching).expect("sizes agree");
    OptResult {
        matching,
        cost_per_k,
    }
}

pub fn brute_force_optimal(instance: &Instance, k: usize) -> Result<(Matching, Rational)> {
    brute_force_optimal_with_limit(instance, k, DEFAULT_BRUTE_FORCE_LIMIT)
}

/// Enumerates all `n!` matchings in lexicographic order of the item
/// permutation and returns the first one attaining the minimum `SC_k`.
pub fn brute_force_optimal_with_limit(
    instance: &Instance,
    k: usize,
    limit: usize,
) -> Result<(Matching, Rational)> {
    let n = instance.n();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    model::check_k(k, n)?;
    let dist: Vec<Vec<Rational>> = (0..n)
        .map(|a| (0..n).map(|g| instance.distance(a, g)).collect())
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, Rational)> = None;
    let mut costs = Vec::with_capacity(n);
    loop {
        costs.clear();
        costs.extend(perm.iter().enumerate().map(|(a, &g)| dist[a][g].clone()));
        let value = model::k_centrum(&costs, k)?;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((perm.clone(), value));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (perm, value) = best.expect("at least one permutation");
    Ok((Matching::new(perm)?, value))
}

/// Advances to the next permutation in lexicographic order.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn two_agent_example() {
        let inst = Instance::from_ints(&[0, 10], &[1, 11]).unwrap();
        let opt = greedy_optimal(&inst);
        assert_eq!(opt.matching.as_slice(), &[0, 1]);
        assert_eq!(opt.cost(2), &int(2));
        // the swapped matching costs 11 + 9
        let (m, c) = brute_force_optimal(&inst, 1).unwrap();
        assert_eq!(c, int(1));
        assert_eq!(m.as_slice(), &[0, 1]);
    }

    #[test]
    fn single_agent() {
        let inst = Instance::from_ints(&[3], &[-4]).unwrap();
        assert_eq!(greedy_optimal(&inst).cost_per_k, vec![int(7)]);
        assert_eq!(brute_force_optimal(&inst, 1).unwrap().1, int(7));
    }

    #[test]
    fn brute_force_guards() {
        let inst = Instance::from_ints(&[0; 9], &[0; 9]).unwrap();
        assert!(matches!(
            brute_force_optimal(&inst, 1),
            Err(Error::TooLarge { n: 9, limit: 8 })
        ));
        let small = Instance::from_ints(&[0, 1], &[0, 1]).unwrap();
        assert!(brute_force_optimal(&small, 3).is_err());
    }

    #[test]
    fn permutation_enumeration_count() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(p, vec![3, 2, 1, 0]);
    }
}
