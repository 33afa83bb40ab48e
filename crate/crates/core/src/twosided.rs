//! Two-sided matching on the line: takers and givers rank each other.
//!
//! Both sides' left-to-right orders can be read off the rankings, which
//! makes the rank-for-rank matching (optimal for every `SC_k`) computable
//! from ordinal data alone. The query solvers do the same while asking a
//! [`QueryOracle`] for as little of the hidden rankings as they can.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{self, derive_profile, Instance, Matching, OrdinalProfile};
use crate::optimal;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSidedInstance {
    takers: Vec<Rational>,
    givers: Vec<Rational>,
}

impl TwoSidedInstance {
    pub fn new(takers: Vec<Rational>, givers: Vec<Rational>) -> Result<Self> {
        // same shape rules as a one-sided instance
        Instance::new(takers.clone(), givers.clone())?;
        Ok(TwoSidedInstance { takers, givers })
    }

    pub fn from_ints(takers: &[i64], givers: &[i64]) -> Result<Self> {
        Self::new(
            takers.iter().map(|&v| rational::int(v)).collect(),
            givers.iter().map(|&v| rational::int(v)).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.takers.len()
    }

    pub fn takers(&self) -> &[Rational] {
        &self.takers
    }

    pub fn givers(&self) -> &[Rational] {
        &self.givers
    }

    /// Takers as agents and givers as items, for cost evaluation.
    pub fn as_instance(&self) -> Instance {
        Instance::new(self.takers.clone(), self.givers.clone()).expect("validated")
    }

    /// Each taker's ranking of the givers.
    pub fn taker_profile(&self) -> OrdinalProfile {
        derive_profile(&self.as_instance())
    }

    /// Each giver's ranking of the takers.
    pub fn giver_profile(&self) -> OrdinalProfile {
        derive_profile(&Instance::new(self.givers.clone(), self.takers.clone()).expect("validated"))
    }

    pub fn cost(&self, matching: &Matching, k: usize) -> Result<Rational> {
        model::k_centrum_cost(&self.as_instance(), matching, k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideOrder {
    pub order: Vec<usize>,
    /// Set when the order was reversed to agree with the other side.
    pub flipped: bool,
}

/// Distinct last-ranked entries of a profile, ascending. At most two on a line.
pub fn bottoms(profile: &OrdinalProfile) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = (0..profile.n()).map(|a| profile.bottom(a)).collect();
    out.sort_unstable();
    out.dedup();
    if out.len() > 2 {
        return Err(Error::inconsistent(format!(
            "{} different agents are ranked last",
            out.len()
        )));
    }
    Ok(out)
}

/// Orders one side given `near`, an extreme agent of the other side, with
/// the rankings of `near` and of some agent `far` on the opposite end, and
/// each agent's top choice. Those with top `near` come first, nearest to
/// `near`'s end first.
fn split_order(near: usize, near_rank: &[usize], far_rank: &[usize], top_of: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut order: Vec<usize> = far_rank.iter().copied().filter(|&x| top_of(x) == near).collect();
    order.reverse();
    order.extend(near_rank.iter().copied().filter(|&x| top_of(x) != near));
    order
}

/// The left-to-right order (up to reversal) of the side whose rankings are
/// `own`, using the other side's rankings `other` of it.
pub fn recover_side_order(own: &OrdinalProfile, other: &OrdinalProfile) -> Result<SideOrder> {
    let n = own.n();
    if other.n() != n {
        return Err(Error::domain("the two profiles have different sizes"));
    }
    let order = match bottoms(own)?.as_slice() {
        [b] => other.ranking(*b).to_vec(),
        [b_ell, b_r] => split_order(*b_ell, other.ranking(*b_ell), other.ranking(*b_r), |a| own.top(a)),
        _ => unreachable!("a profile has at least one agent"),
    };
    Ok(SideOrder { order, flipped: false })
}

/// Rank-for-rank matching of the two recovered orders after aligning them.
pub fn two_sided_optimal(taker_profile: &OrdinalProfile, giver_profile: &OrdinalProfile) -> Result<Matching> {
    let n = taker_profile.n();
    let takers = recover_side_order(taker_profile, giver_profile)?;
    let mut givers = recover_side_order(giver_profile, taker_profile)?;
    if n > 1 {
        let t = &takers.order;
        let g = &givers.order;
        let flip = if bottoms(taker_profile)?.len() == 2 {
            // the last taker's least-preferred giver sits at the first end
            taker_profile.bottom(t[n - 1]) == g[n - 1]
        } else if bottoms(giver_profile)?.len() == 2 {
            giver_profile.bottom(g[n - 1]) == t[n - 1]
        } else {
            // every giver ranks `a` last, so all givers lie on one side of it
            // and its favourite is the giver at the same end
            let a = giver_profile.bottom(0);
            let top = taker_profile.top(a);
            if a == t[0] {
                top != g[0]
            } else if a == t[n - 1] {
                top != g[n - 1]
            } else {
                return Err(Error::inconsistent("the givers' common last taker is not extreme"));
            }
        };
        if flip {
            givers.order.reverse();
            givers.flipped = true;
        }
    }
    Ok(rank_for_rank(&takers.order, &givers.order))
}

fn rank_for_rank(takers: &[usize], givers: &[usize]) -> Matching {
    let mut item_of = vec![0; takers.len()];
    for (&a, &b) in takers.iter().zip(givers) {
        item_of[a] = b;
    }
    Matching::new(item_of).expect("two permutations")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Taker,
    Giver,
}

/// Answers rank and full-preference queries about a hidden instance and
/// counts them. Repeating a query, or asking a rank of an agent whose whole
/// ranking is already revealed, is free.
#[derive(Debug, Clone)]
pub struct QueryOracle {
    takers: OrdinalProfile,
    givers: OrdinalProfile,
    asked: HashSet<(Side, usize, usize)>,
    revealed: HashSet<(Side, usize)>,
    rank_queries: usize,
    full_queries: usize,
}

impl QueryOracle {
    pub fn new(instance: &TwoSidedInstance) -> Self {
        QueryOracle {
            takers: instance.taker_profile(),
            givers: instance.giver_profile(),
            asked: HashSet::new(),
            revealed: HashSet::new(),
            rank_queries: 0,
            full_queries: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.takers.n()
    }

    pub fn rank_queries(&self) -> usize {
        self.rank_queries
    }

    pub fn full_queries(&self) -> usize {
        self.full_queries
    }

    fn profile(&self, side: Side) -> &OrdinalProfile {
        match side {
            Side::Taker => &self.takers,
            Side::Giver => &self.givers,
        }
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.n() {
            return Err(Error::domain(format!("agent {} out of range 1..={}", agent + 1, self.n())));
        }
        Ok(())
    }

    /// The `t`-th choice (1-based) of `agent` on `side`.
    pub fn rank(&mut self, side: Side, agent: usize, t: usize) -> Result<usize> {
        self.check_agent(agent)?;
        if t == 0 || t > self.n() {
            return Err(Error::domain(format!("rank {t} out of range 1..={}", self.n())));
        }
        if !self.revealed.contains(&(side, agent)) && self.asked.insert((side, agent, t)) {
            self.rank_queries += 1;
        }
        Ok(self.profile(side).ranking(agent)[t - 1])
    }

    pub fn full(&mut self, side: Side, agent: usize) -> Result<Vec<usize>> {
        self.check_agent(agent)?;
        if self.revealed.insert((side, agent)) {
            self.full_queries += 1;
        }
        Ok(self.profile(side).ranking(agent).to_vec())
    }

    /// A whole ranking from ranks `1..n-1`; the last entry is implied.
    pub fn full_via_ranks(&mut self, side: Side, agent: usize) -> Result<Vec<usize>> {
        let n = self.n();
        let mut ranking = Vec::with_capacity(n);
        for t in 1..n {
            ranking.push(self.rank(side, agent, t)?);
        }
        let mut seen = vec![false; n];
        for &x in &ranking {
            seen[x] = true;
        }
        ranking.push((0..n).find(|&x| !seen[x]).expect("one entry left"));
        Ok(ranking)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryCase {
    /// A single agent needed no queries.
    Trivial,
    /// The takers share one least-preferred giver.
    OneBottom,
    /// The takers' least-preferred givers are two different ones.
    TwoBottoms,
    /// Some taker's favourite is the first taker's least-preferred giver.
    TopHit,
    /// Nobody's favourite is the first taker's least-preferred giver.
    TopMiss,
    /// Every giver revealed its full ranking.
    AllFull,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub matching: Matching,
    pub rank_queries: usize,
    pub full_queries: usize,
    pub case: QueryCase,
    /// The guaranteed ceiling for the kind of query this solver uses.
    pub bound: usize,
}

impl QueryOutcome {
    pub fn within_bound(&self) -> bool {
        self.rank_queries.max(self.full_queries) <= self.bound
    }
}

/// Giver order aligned with a known taker order, from the rankings of the
/// two extreme takers and every giver's favourite taker.
fn givers_from_taker_order(
    oracle: &mut QueryOracle,
    taker_order: &[usize],
    first_rank: &[usize],
    last_rank: &[usize],
) -> Result<Vec<usize>> {
    let n = taker_order.len();
    let mut top = vec![0; n];
    for (b, slot) in top.iter_mut().enumerate() {
        *slot = oracle.rank(Side::Giver, b, 1)?;
    }
    Ok(split_order(taker_order[0], first_rank, last_rank, |b| top[b]))
}

fn finish(
    oracle: &QueryOracle,
    takers: &[usize],
    givers: &[usize],
    case: QueryCase,
    bound: usize,
) -> QueryOutcome {
    QueryOutcome {
        matching: rank_for_rank(takers, givers),
        rank_queries: oracle.rank_queries(),
        full_queries: oracle.full_queries(),
        case,
        bound,
    }
}

/// Optimal matching when the takers' rankings are known and givers can
/// only be asked rank queries. Uses at most `3n - 4` of them, and at most
/// `2n - 2` when the takers share a least-preferred giver.
pub fn solve_one_sided_ranks(oracle: &mut QueryOracle, taker_profile: &OrdinalProfile) -> Result<QueryOutcome> {
    let n = oracle.n();
    if taker_profile.n() != n {
        return Err(Error::domain("taker profile and oracle sizes differ"));
    }
    if n == 1 {
        return Ok(finish(oracle, &[0], &[0], QueryCase::Trivial, 0));
    }
    let (takers, case, bound) = match bottoms(taker_profile)?.as_slice() {
        [b] => {
            let order = oracle.full_via_ranks(Side::Giver, *b)?;
            (order, QueryCase::OneBottom, 2 * n - 2)
        }
        [b_ell, b_r] => {
            let near = oracle.full_via_ranks(Side::Giver, *b_ell)?;
            let far = oracle.full_via_ranks(Side::Giver, *b_r)?;
            let order = split_order(*b_ell, &near, &far, |a| taker_profile.top(a));
            (order, QueryCase::TwoBottoms, 3 * n - 4)
        }
        _ => unreachable!(),
    };
    let first = taker_profile.ranking(takers[0]).to_vec();
    let last = taker_profile.ranking(takers[n - 1]).to_vec();
    let givers = givers_from_taker_order(oracle, &takers, &first, &last)?;
    Ok(finish(oracle, &takers, &givers, case, bound))
}

/// Optimal matching with no prior knowledge, from at most `5n - 4` rank
/// queries split over both sides.
pub fn solve_zero_knowledge(oracle: &mut QueryOracle) -> Result<QueryOutcome> {
    let n = oracle.n();
    let bound = (5 * n).saturating_sub(4);
    if n == 1 {
        return Ok(finish(oracle, &[0], &[0], QueryCase::Trivial, bound));
    }
    let a0 = 0;
    // b_1 lies at one end of the givers; call that end the right one.
    let b1 = oracle.rank(Side::Taker, a0, n)?;
    let mut top = vec![usize::MAX; n];
    for (a, slot) in top.iter_mut().enumerate().skip(1) {
        *slot = oracle.rank(Side::Taker, a, 1)?;
    }

    if let Some(a1) = (1..n).find(|&a| top[a] == b1) {
        // every other giver lies left of a1, so its ranking is right to left
        let mut givers = oracle.full_via_ranks(Side::Taker, a1)?;
        givers.reverse();
        let leftmost = givers[0];
        let by_b1 = oracle.full_via_ranks(Side::Giver, b1)?;
        let by_leftmost = oracle.full_via_ranks(Side::Giver, leftmost)?;
        // top[a0] is unknown but cannot be b_1, its last choice
        let mut takers: Vec<usize> = by_b1.iter().copied().filter(|&a| top[a] != b1).collect();
        takers.reverse();
        takers.extend(by_leftmost.iter().copied().filter(|&a| top[a] == b1));
        return Ok(finish(oracle, &takers, &givers, QueryCase::TopHit, bound));
    }

    // all takers lie left of b_1
    let mut takers = oracle.full_via_ranks(Side::Giver, b1)?;
    takers.reverse();
    let first = oracle.full_via_ranks(Side::Taker, takers[0])?;
    let last = oracle.full_via_ranks(Side::Taker, takers[n - 1])?;
    let givers = givers_from_taker_order(oracle, &takers, &first, &last)?;
    Ok(finish(oracle, &takers, &givers, QueryCase::TopMiss, bound))
}

/// Reveals every giver's full ranking and solves the two-sided problem.
pub fn solve_one_sided_full(oracle: &mut QueryOracle, taker_profile: &OrdinalProfile) -> Result<QueryOutcome> {
    let n = oracle.n();
    let rankings = (0..n)
        .map(|b| oracle.full(Side::Giver, b))
        .collect::<Result<Vec<_>>>()?;
    let giver_profile = OrdinalProfile::new(rankings)?;
    let matching = two_sided_optimal(taker_profile, &giver_profile)?;
    Ok(QueryOutcome {
        matching,
        rank_queries: oracle.rank_queries(),
        full_queries: oracle.full_queries(),
        case: QueryCase::AllFull,
        bound: n,
    })
}

/// Two instances that agree on every taker ranking (`b_1 ≻ … ≻ b_n`) and on
/// the ranking `a_1 ≻ … ≻ a_n` of every giver in `queried`, yet whose
/// optima give `a_n` different partners.
///
/// Taker `a_k` sits at `k - 1` and giver `b_l` at `-l n`, except that one
/// unqueried giver `b_i` is moved to `n - 1 + i n`, past `a_n`. The first
/// instance moves the smallest unqueried id, the second the next one.
pub fn fullpref_lb_witness(n: usize, queried: &[usize]) -> Result<(TwoSidedInstance, TwoSidedInstance)> {
    let (i, j) = witness_pair(n, queried)?;
    Ok((witness_instance(n, i)?, witness_instance(n, j)?))
}

/// The two smallest giver ids outside `queried`.
pub fn witness_pair(n: usize, queried: &[usize]) -> Result<(usize, usize)> {
    if let Some(&b) = queried.iter().find(|&&b| b >= n) {
        return Err(Error::domain(format!("giver {} out of range 1..={n}", b + 1)));
    }
    let free: Vec<usize> = (0..n).filter(|b| !queried.contains(b)).collect();
    if free.len() < 2 {
        return Err(Error::domain(format!(
            "at most n - 2 = {} givers may be queried",
            n.saturating_sub(2)
        )));
    }
    Ok((free[0], free[1]))
}

/// The witness metric with giver `moved` (0-based) displaced past `a_n`.
pub fn witness_instance(n: usize, moved: usize) -> Result<TwoSidedInstance> {
    if moved >= n {
        return Err(Error::domain("displaced giver out of range"));
    }
    let n_i = n as i64;
    let takers: Vec<i64> = (0..n_i).collect();
    let givers: Vec<i64> = (1..=n_i)
        .map(|l| if l as usize == moved + 1 { n_i - 1 + l * n_i } else { -l * n_i })
        .collect();
    TwoSidedInstance::from_ints(&takers, &givers)
}

/// Whether `instance` reproduces the answers the witness relies on.
pub fn witness_consistent(instance: &TwoSidedInstance, queried: &[usize]) -> Result<bool> {
    let n = instance.n();
    let common: Vec<usize> = (0..n).collect();
    let takers_ok = model::check_consistency(&OrdinalProfile::new(vec![common.clone(); n])?, &instance.as_instance())?;
    let from_givers = Instance::new(instance.givers().to_vec(), instance.takers().to_vec())?;
    let givers_ok = queried
        .iter()
        .all(|&b| model::ranking_consistent(from_givers.agent(b), &common, from_givers.items()));
    Ok(takers_ok && givers_ok)
}

/// Whether every `SC_n`-optimal matching pairs `taker` with `giver`: forcing
/// any other partner and matching the rest optimally costs strictly more.
pub fn partner_is_forced(instance: &TwoSidedInstance, taker: usize, giver: usize) -> Result<bool> {
    let n = instance.n();
    if taker >= n || giver >= n {
        return Err(Error::domain("agent out of range"));
    }
    let inst = instance.as_instance();
    let best = optimal::greedy_optimal(&inst).cost(n).clone();
    for other in (0..n).filter(|&b| b != giver) {
        let mut cost = inst.distance(taker, other);
        if n > 1 {
            let agents = (0..n).filter(|&a| a != taker).map(|a| inst.agent(a).clone()).collect();
            let items = (0..n).filter(|&b| b != other).map(|b| inst.item(b).clone()).collect();
            let rest = Instance::new(agents, items)?;
            cost += optimal::greedy_optimal(&rest).cost(n - 1);
        }
        if cost <= best {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn single_pair() {
        let inst = TwoSidedInstance::from_ints(&[3], &[8]).unwrap();
        let m = two_sided_optimal(&inst.taker_profile(), &inst.giver_profile()).unwrap();
        assert_eq!(m.as_slice(), &[0]);
        let mut o = QueryOracle::new(&inst);
        assert_eq!(solve_zero_knowledge(&mut o).unwrap().rank_queries, 0);
    }

    #[test]
    fn two_pairs_match_in_order() {
        let inst = TwoSidedInstance::from_ints(&[0, 10], &[1, 11]).unwrap();
        let t = inst.taker_profile();
        let g = inst.giver_profile();
        let order = recover_side_order(&t, &g).unwrap().order;
        assert!(order == vec![0, 1] || order == vec![1, 0]);
        assert_eq!(two_sided_optimal(&t, &g).unwrap().as_slice(), &[0, 1]);
    }

    #[test]
    fn orders_on_a_spread_instance() {
        let inst = TwoSidedInstance::from_ints(&[5, -3, 12, 0, 7], &[-10, 4, 6, 13, 1]).unwrap();
        let t = recover_side_order(&inst.taker_profile(), &inst.giver_profile()).unwrap().order;
        let xs: Vec<&Rational> = t.iter().map(|&a| &inst.takers()[a]).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]) || xs.windows(2).all(|w| w[0] > w[1]));
        let m = two_sided_optimal(&inst.taker_profile(), &inst.giver_profile()).unwrap();
        let opt = optimal::greedy_optimal(&inst.as_instance());
        assert_eq!(model::cost_per_k(&inst.as_instance(), &m).unwrap(), opt.cost_per_k);
    }

    #[test]
    fn oracle_counts_distinct_queries() {
        let inst = TwoSidedInstance::from_ints(&[0, 1, 2], &[5, 6, 7]).unwrap();
        let mut o = QueryOracle::new(&inst);
        o.rank(Side::Giver, 0, 1).unwrap();
        o.rank(Side::Giver, 0, 1).unwrap();
        assert_eq!(o.rank_queries(), 1);
        let r = o.full_via_ranks(Side::Giver, 0).unwrap();
        assert_eq!(r, vec![2, 1, 0]);
        assert_eq!(o.rank_queries(), 2);
        o.full(Side::Taker, 1).unwrap();
        o.rank(Side::Taker, 1, 3).unwrap();
        assert_eq!((o.rank_queries(), o.full_queries()), (2, 1));
        assert!(o.rank(Side::Taker, 1, 4).is_err());
        assert!(o.rank(Side::Taker, 3, 1).is_err());
    }

    #[test]
    fn witness_metrics() {
        let (top, bottom) = fullpref_lb_witness(3, &[]).unwrap();
        assert!(witness_consistent(&top, &[]).unwrap());
        assert!(witness_consistent(&bottom, &[]).unwrap());
        assert!(partner_is_forced(&top, 2, 0).unwrap());
        assert!(partner_is_forced(&bottom, 2, 1).unwrap());
        assert_eq!(top.givers()[0], int(5));
        assert!(fullpref_lb_witness(3, &[0, 1]).is_err());
    }
}
