//! Shared data model: instances on a line, ordinal profiles, matchings and
//! the k-centrum objective.
//!
//! Agents and items are identified by 0-based indices internally. The JSON
//! forms (see [`crate::io`]) use 1-based item ids inside rankings.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `n` agents and `n` items placed on the real line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<Rational>,
    items: Vec<Rational>,
}

impl Instance {
    pub fn new(agents: Vec<Rational>, items: Vec<Rational>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::domain("an instance needs at least one agent"));
        }
        if agents.len() != items.len() {
            return Err(Error::domain(format!(
                "{} agents but {} items",
                agents.len(),
                items.len()
            )));
        }
        Ok(Instance { agents, items })
    }

    pub fn from_ints(agents: &[i64], items: &[i64]) -> Result<Self> {
        Self::new(
            agents.iter().map(|&v| rational::int(v)).collect(),
            items.iter().map(|&v| rational::int(v)).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[Rational] {
        &self.agents
    }

    pub fn items(&self) -> &[Rational] {
        &self.items
    }

    pub fn agent(&self, a: usize) -> &Rational {
        &self.agents[a]
    }

    pub fn item(&self, g: usize) -> &Rational {
        &self.items[g]
    }

    pub fn distance(&self, agent: usize, item: usize) -> Rational {
        rational::dist(&self.agents[agent], &self.items[item])
    }

    /// The instance reflected through the origin (`x -> -x`).
    pub fn mirrored(&self) -> Instance {
        Instance {
            agents: self.agents.iter().map(|x| -x).collect(),
            items: self.items.iter().map(|x| -x).collect(),
        }
    }

    /// Agent ids sorted by `(coordinate, id)`.
    pub fn agents_left_to_right(&self) -> Vec<usize> {
        sorted_by_position(&self.agents)
    }

    /// Item ids sorted by `(coordinate, id)`.
    pub fn items_left_to_right(&self) -> Vec<usize> {
        sorted_by_position(&self.items)
    }

    /// True when all `2n` coordinates are pairwise distinct.
    pub fn all_distinct(&self) -> bool {
        let mut all: Vec<&Rational> = self.agents.iter().chain(self.items.iter()).collect();
        all.sort();
        all.windows(2).all(|w| w[0] != w[1])
    }
}

pub(crate) fn sorted_by_position(coords: &[Rational]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..coords.len()).collect();
    ids.sort_by(|&a, &b| coords[a].cmp(&coords[b]).then(a.cmp(&b)));
    ids
}

/// Each agent's strict ranking of the items, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdinalProfile {
    rankings: Vec<Vec<usize>>,
    /// `positions[a][g]` is the rank (0 = top) of item `g` for agent `a`.
    positions: Vec<Vec<usize>>,
}

impl OrdinalProfile {
    /// Builds a profile from 0-based rankings, checking each is a permutation.
    pub fn new(rankings: Vec<Vec<usize>>) -> Result<Self> {
        let n = rankings.len();
        if n == 0 {
            return Err(Error::domain("a profile needs at least one agent"));
        }
        let mut positions = Vec::with_capacity(n);
        for (a, ranking) in rankings.iter().enumerate() {
            if ranking.len() != n {
                return Err(Error::domain(format!(
                    "ranking of agent {} has {} entries, expected {n}",
                    a + 1,
                    ranking.len()
                )));
            }
            let mut pos = vec![usize::MAX; n];
            for (r, &g) in ranking.iter().enumerate() {
                if g >= n || pos[g] != usize::MAX {
                    return Err(Error::domain(format!(
                        "ranking of agent {} is not a permutation of 1..={n}",
                        a + 1
                    )));
                }
                pos[g] = r;
            }
            positions.push(pos);
        }
        Ok(OrdinalProfile {
            rankings,
            positions,
        })
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub fn ranking(&self, agent: usize) -> &[usize] {
        &self.rankings[agent]
    }

    pub fn rank_of(&self, agent: usize, item: usize) -> usize {
        self.positions[agent][item]
    }

    /// `true` if `agent` ranks `g` above `h`.
    pub fn prefers(&self, agent: usize, g: usize, h: usize) -> bool {
        self.positions[agent][g] < self.positions[agent][h]
    }

    pub fn top(&self, agent: usize) -> usize {
        self.rankings[agent][0]
    }

    pub fn bottom(&self, agent: usize) -> usize {
        *self.rankings[agent].last().expect("non-empty ranking")
    }

    /// Number of agents whose top item is `item`.
    pub fn plurality(&self, item: usize) -> usize {
        (0..self.n()).filter(|&a| self.top(a) == item).count()
    }

    /// Items with positive plurality score, ascending by id.
    pub fn positive_plurality(&self) -> Vec<usize> {
        let mut tops: Vec<usize> = (0..self.n()).map(|a| self.top(a)).collect();
        tops.sort_unstable();
        tops.dedup();
        tops
    }
}

/// A bijection from agents to items.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    item_of: Vec<usize>,
}

impl Matching {
    pub fn new(item_of: Vec<usize>) -> Result<Self> {
        let n = item_of.len();
        let mut seen = vec![false; n];
        for &g in &item_of {
            if g >= n || std::mem::replace(&mut seen[g], true) {
                return Err(Error::domain("matching is not a bijection"));
            }
        }
        Ok(Matching { item_of })
    }

    pub fn identity(n: usize) -> Self {
        Matching {
            item_of: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.item_of.len()
    }

    pub fn item_of(&self, agent: usize) -> usize {
        self.item_of[agent]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.item_of
    }

    pub fn agent_of_items(&self) -> Vec<usize> {
        let mut inv = vec![0; self.n()];
        for (a, &g) in self.item_of.iter().enumerate() {
            inv[g] = a;
        }
        inv
    }

    /// `(agent, item)` pairs in agent order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.item_of.iter().copied().enumerate()
    }
}

/// Ranks items for every agent by increasing exact distance; equal
/// distances go to the item with the smaller coordinate, then smaller id.
pub fn derive_profile(instance: &Instance) -> OrdinalProfile {
    let n = instance.n();
    let rankings = (0..n)
        .map(|a| {
            let dists: Vec<Rational> = (0..n).map(|g| instance.distance(a, g)).collect();
            let mut ranking: Vec<usize> = (0..n).collect();
            ranking.sort_by(|&g, &h| {
                dists[g]
                    .cmp(&dists[h])
                    .then_with(|| instance.item(g).cmp(instance.item(h)))
                    .then(g.cmp(&h))
            });
            ranking
        })
        .collect();
    OrdinalProfile::new(rankings).expect("sorted permutations")
}

/// Sum of the `k` largest values, `1 <= k <= values.len()`.
pub fn k_centrum(values: &[Rational], k: usize) -> Result<Rational> {
    check_k(k, values.len())?;
    let mut sorted: Vec<&Rational> = values.iter().collect();
    sorted.sort_by(|a, b| b.cmp(a));
    Ok(sorted[..k].iter().fold(rational::zero(), |acc, v| acc + *v))
}

/// `SC_k` for every `k = 1..=n`, as a vector indexed by `k - 1`.
pub fn k_centrum_all(values: &[Rational]) -> Vec<Rational> {
    let mut sorted: Vec<&Rational> = values.iter().collect();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut acc = rational::zero();
    sorted
        .into_iter()
        .map(|v| {
            acc += v;
            acc.clone()
        })
        .collect()
}

pub(crate) fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("k = {k} is outside 1..={n}")));
    }
    Ok(())
}

pub fn matched_distances(instance: &Instance, matching: &Matching) -> Vec<Rational> {
    matching
        .pairs()
        .map(|(a, g)| instance.distance(a, g))
        .collect()
}

/// Sum of the `k` largest agent-to-match distances.
pub fn k_centrum_cost(instance: &Instance, matching: &Matching, k: usize) -> Result<Rational> {
    check_sizes(instance.n(), matching.n())?;
    k_centrum(&matched_distances(instance, matching), k)
}

/// `SC_1..=SC_n` of a matching.
pub fn cost_per_k(instance: &Instance, matching: &Matching) -> Result<Vec<Rational>> {
    check_sizes(instance.n(), matching.n())?;
    Ok(k_centrum_all(&matched_distances(instance, matching)))
}

fn check_sizes(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::domain(format!("size mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// Whether the instance's distances are consistent with the profile, i.e.
/// every adjacent pair `g ≻ g'` in a ranking has `d(a, g) <= d(a, g')`.
pub fn check_consistency(profile: &OrdinalProfile, instance: &Instance) -> Result<bool> {
    check_sizes(profile.n(), instance.n())?;
    Ok((0..profile.n()).all(|a| ranking_consistent(instance.agent(a), profile.ranking(a), instance.items())))
}

/// Same check for a single ranking of `targets` seen from `from`.
pub(crate) fn ranking_consistent(from: &Rational, ranking: &[usize], targets: &[Rational]) -> bool {
    ranking.windows(2).all(|w| {
        rational::dist(from, &targets[w[0]]).cmp(&rational::dist(from, &targets[w[1]])) != Ordering::Greater
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn single_agent_profile() {
        let inst = Instance::from_ints(&[0], &[5]).unwrap();
        assert_eq!(derive_profile(&inst).rankings(), &[vec![0]]);
    }

    #[test]
    fn nearest_first() {
        let inst = Instance::from_ints(&[0, 10], &[1, 11]).unwrap();
        let p = derive_profile(&inst);
        assert_eq!(p.ranking(0), &[0, 1]);
        assert_eq!(p.ranking(1), &[1, 0]);
    }

    #[test]
    fn ties_go_left_then_by_id() {
        // agent at 0, items at -1, 1 and a coincident pair at 2
        let inst = Instance::from_ints(&[0, 0, 0, 0], &[1, -1, 2, 2]).unwrap();
        let p = derive_profile(&inst);
        assert_eq!(p.ranking(0), &[1, 0, 2, 3]);
    }

    #[test]
    fn k_centrum_of_example_distances() {
        let d = [int(5), int(2), int(7)];
        assert_eq!(k_centrum(&d, 2).unwrap(), int(12));
        assert_eq!(k_centrum(&d, 1).unwrap(), int(7));
        assert_eq!(k_centrum(&d, 3).unwrap(), int(14));
        assert!(k_centrum(&d, 0).is_err());
        assert!(k_centrum(&d, 4).is_err());
        assert_eq!(k_centrum_all(&d), vec![int(7), int(12), int(14)]);
    }

    #[test]
    fn reversed_ranking_is_inconsistent() {
        let inst = Instance::from_ints(&[0, 10], &[1, 11]).unwrap();
        let good = derive_profile(&inst);
        assert!(check_consistency(&good, &inst).unwrap());
        let bad = OrdinalProfile::new(vec![vec![1, 0], vec![1, 0]]).unwrap();
        assert!(!check_consistency(&bad, &inst).unwrap());
        let small = OrdinalProfile::new(vec![vec![0]]).unwrap();
        assert!(check_consistency(&small, &inst).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(OrdinalProfile::new(vec![vec![0, 0], vec![0, 1]]).is_err());
        assert!(OrdinalProfile::new(vec![vec![0, 2], vec![0, 1]]).is_err());
        assert!(OrdinalProfile::new(vec![vec![0]]).is_ok());
        assert!(Matching::new(vec![1, 1]).is_err());
        assert!(Instance::new(vec![int(0)], vec![]).is_err());
        assert!(Instance::new(vec![], vec![]).is_err());
    }

    #[test]
    fn plurality_and_extremes() {
        let p = OrdinalProfile::new(vec![vec![1, 0, 2], vec![1, 2, 0], vec![2, 1, 0]]).unwrap();
        assert_eq!(p.plurality(1), 2);
        assert_eq!(p.plurality(0), 0);
        assert_eq!(p.positive_plurality(), vec![1, 2]);
        assert_eq!(p.bottom(0), 2);
    }

    #[test]
    fn mirrored_instance_flips_coordinates() {
        let inst = Instance::new(vec![ratio(1, 2)], vec![int(-3)]).unwrap();
        let m = inst.mirrored();
        assert_eq!(m.agent(0), &ratio(-1, 2));
        assert_eq!(m.item(0), &int(3));
    }
}
