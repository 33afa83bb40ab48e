//! The ordinal one-sided matching algorithm.
//!
//! The algorithm picks two extreme items `g_ell`, `g_r` among the items that
//! somebody ranks first, chooses a pair of anchor agents whose preferences
//! carve out the largest inner item set `G_in`, recovers the left-to-right
//! order of `G_in` from the rankings alone, and matches that order against
//! the agents grouped by their favourite item. Items outside `G_in` are
//! handed out arbitrarily (ascending ids).

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::lp::{self, Constraint, Relation};
use crate::model::{Matching, OrdinalProfile};

/// Largest number of unresolved inner items the exhaustive ordering
/// fallback is willing to handle.
pub const DEFAULT_FALLBACK_CAP: usize = 16;

/// Candidate axes the strict search may test before giving up on distinct
/// points and trying merged twins.
const STRICT_LEAF_BUDGET: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryOptions {
    pub fallback_cap: usize,
    /// Off sends every inner order straight to the axis search.
    pub pairwise_rules: bool,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            fallback_cap: DEFAULT_FALLBACK_CAP,
            pairwise_rules: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub g_ell: usize,
    pub g_r: usize,
    pub a_ell: usize,
    pub a_r: usize,
    /// Ascending item ids.
    pub g_in: Vec<usize>,
    /// Ascending item ids.
    pub g_out: Vec<usize>,
}

impl Partition {
    pub fn contains(&self, item: usize) -> bool {
        self.g_in.binary_search(&item).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FallbackStage {
    /// All inner items placed at distinct points.
    Strict,
    /// Items that every ranking keeps adjacent were merged into one point.
    Merged,
}

/// The recovered order `π_g` of `G_in`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemOrder {
    pub items: Vec<usize>,
    /// True when there were at least two inner items and the order was
    /// oriented so that `g_ell` comes before `g_r`.
    pub canonical: bool,
    /// Set when the pairwise rules left the order incomplete.
    pub fallback: Option<FallbackStage>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderMatchRun {
    pub partition: Partition,
    pub item_order: ItemOrder,
    /// `π_a`: agents grouped by top item in `π_g` order, ties by id.
    pub agent_order: Vec<usize>,
    pub matching: Matching,
}

/// The items ranked last among the positive-plurality items, as
/// `(g_ell, g_r)` with `g_ell` the smaller id. Equal when there is only one.
pub fn identify_extremes(profile: &OrdinalProfile) -> Result<(usize, usize)> {
    let n = profile.n();
    let mut in_plus = vec![false; n];
    for g in profile.positive_plurality() {
        in_plus[g] = true;
    }
    let mut lasts: Vec<usize> = Vec::new();
    for a in 0..n {
        let last = *profile
            .ranking(a)
            .iter()
            .rev()
            .find(|&&g| in_plus[g])
            .expect("every agent's top has positive plurality");
        if !lasts.contains(&last) {
            lasts.push(last);
        }
    }
    lasts.sort_unstable();
    match lasts.as_slice() {
        [g] => Ok((*g, *g)),
        [l, r] => Ok((*l, *r)),
        _ => Err(Error::inconsistent(format!(
            "{} different items are ranked last among the favourite items",
            lasts.len()
        ))),
    }
}

/// `G_in(a_i, a_j)`: items `a_i` prefers to `g_r` or `a_j` prefers to `g_ell`.
pub fn inner_items(
    profile: &OrdinalProfile,
    a_i: usize,
    a_j: usize,
    g_ell: usize,
    g_r: usize,
) -> Vec<usize> {
    if g_ell == g_r {
        return Vec::new();
    }
    (0..profile.n())
        .filter(|&g| profile.prefers(a_i, g, g_r) || profile.prefers(a_j, g, g_ell))
        .collect()
}

fn anchor_candidates(profile: &OrdinalProfile, g_ell: usize, g_r: usize) -> (Vec<usize>, Vec<usize>) {
    let with_top = |g| (0..profile.n()).filter(|&a| profile.top(a) == g).collect::<Vec<_>>();
    (with_top(g_ell), with_top(g_r))
}

fn partition_for(profile: &OrdinalProfile, g_ell: usize, g_r: usize, a_ell: usize, a_r: usize) -> Partition {
    let g_in = inner_items(profile, a_ell, a_r, g_ell, g_r);
    let g_out = (0..profile.n()).filter(|g| !g_in.contains(g)).collect();
    Partition {
        g_ell,
        g_r,
        a_ell,
        a_r,
        g_in,
        g_out,
    }
}

/// Chooses the anchor pair maximizing `|G_in|`; ties go to the
/// lexicographically smallest `(a_ell, a_r)`.
pub fn build_partition(profile: &OrdinalProfile) -> Result<Partition> {
    let (g_ell, g_r) = identify_extremes(profile)?;
    let (lefts, rights) = anchor_candidates(profile, g_ell, g_r);
    let mut best: Option<(usize, usize, usize)> = None;
    for &i in &lefts {
        for &j in &rights {
            let size = inner_items(profile, i, j, g_ell, g_r).len();
            if best.is_none_or(|(s, _, _)| size > s) {
                best = Some((size, i, j));
            }
        }
    }
    let (_, a_ell, a_r) = best.expect("extreme items have positive plurality");
    Ok(partition_for(profile, g_ell, g_r, a_ell, a_r))
}

/// Partition with caller-chosen anchors. The pair may be given in either
/// order but must consist of an agent with top `g_ell` and one with top `g_r`.
pub fn partition_with_anchors(profile: &OrdinalProfile, anchors: (usize, usize)) -> Result<Partition> {
    let (g_ell, g_r) = identify_extremes(profile)?;
    let (x, y) = anchors;
    let n = profile.n();
    if x >= n || y >= n {
        return Err(Error::domain(format!(
            "anchor agent out of range 1..={n}: ({}, {})",
            x + 1,
            y + 1
        )));
    }
    let (a_ell, a_r) = if profile.top(x) == g_ell && profile.top(y) == g_r {
        (x, y)
    } else if profile.top(y) == g_ell && profile.top(x) == g_r {
        (y, x)
    } else {
        return Err(Error::domain(format!(
            "anchors ({}, {}) must have top items {} and {}",
            x + 1,
            y + 1,
            g_ell + 1,
            g_r + 1
        )));
    };
    Ok(partition_for(profile, g_ell, g_r, a_ell, a_r))
}

/// The valid anchor pair with the smallest `|G_in|` (ties lexicographic).
/// Used to exercise the arbitrary-anchor variant at its worst.
pub fn minimizing_anchors(profile: &OrdinalProfile) -> Result<(usize, usize)> {
    let (g_ell, g_r) = identify_extremes(profile)?;
    let (lefts, rights) = anchor_candidates(profile, g_ell, g_r);
    let mut best: Option<(usize, usize, usize)> = None;
    for &i in &lefts {
        for &j in &rights {
            let size = inner_items(profile, i, j, g_ell, g_r).len();
            if best.is_none_or(|(s, _, _)| size < s) {
                best = Some((size, i, j));
            }
        }
    }
    let (_, i, j) = best.expect("extreme items have positive plurality");
    Ok((i, j))
}

pub fn recover_item_order(profile: &OrdinalProfile, partition: &Partition) -> Result<ItemOrder> {
    recover_item_order_with(profile, partition, RecoveryOptions::default())
}

pub fn recover_item_order_with(
    profile: &OrdinalProfile,
    partition: &Partition,
    options: RecoveryOptions,
) -> Result<ItemOrder> {
    let g_in = &partition.g_in;
    if g_in.len() <= 1 {
        return Ok(ItemOrder {
            items: g_in.clone(),
            canonical: false,
            fallback: None,
        });
    }
    let PairOrder { before, coincident } = if options.pairwise_rules {
        pairwise_order(profile, partition.g_ell, partition.g_r)?
    } else {
        let n = profile.n();
        let mut before = vec![vec![false; n]; n];
        if partition.g_ell != partition.g_r {
            before[partition.g_ell][partition.g_r] = true;
        }
        PairOrder {
            before,
            coincident: vec![vec![false; n]; n],
        }
    };
    let total = g_in
        .iter()
        .all(|&g| g_in.iter().all(|&h| g == h || before[g][h] || before[h][g] || coincident[g][h]));
    if total {
        // coincident items have the same predecessors and go in id order
        let mut items = g_in.clone();
        items.sort_by_key(|&g| (g_in.iter().filter(|&&h| before[h][g]).count(), g));
        return Ok(ItemOrder {
            items,
            canonical: true,
            fallback: None,
        });
    }
    let (items, stage) = fallback_order(profile, g_in, &before, options.fallback_cap)?;
    Ok(ItemOrder {
        items,
        canonical: true,
        fallback: Some(stage),
    })
}

/// What the pairwise rules establish about the item positions.
struct PairOrder {
    /// Strict "left of", closed transitively.
    before: Vec<Vec<bool>>,
    /// Pairs proven to share a point.
    coincident: Vec<Vec<bool>>,
}

/// Strict "left of" relation derived from the rankings, oriented so that
/// `g_ell` is left of `g_r`.
///
/// Two agents whose favourite items are already ordered and who disagree on
/// a pair of items order that pair the same way. Two items on the same
/// side of an agent's favourite are ordered by that agent: the preferred
/// one is nearer the favourite. Both rules and transitive closure repeat
/// until nothing changes.
///
/// Runs of items that every agent ranks consecutively in id order may share
/// a point, so the side rule only votes on pairs inside such a run. Votes
/// one way order the pair; votes both ways prove it is a single point,
/// since distinct items of a run have every agent on the same side of
/// their midpoint. So does a cycle created by the votes.
fn pairwise_order(profile: &OrdinalProfile, g_ell: usize, g_r: usize) -> Result<PairOrder> {
    let n = profile.n();
    let mut before = vec![vec![false; n]; n];
    if g_ell != g_r {
        before[g_ell][g_r] = true;
    }
    let mut twins = vec![vec![true; n]; n];
    for r in profile.rankings() {
        let mut adjacent = vec![vec![false; n]; n];
        for w in r.windows(2) {
            adjacent[w[0]][w[1]] = true;
        }
        for g in 0..n {
            for h in 0..n {
                twins[g][h] &= g < h && adjacent[g][h];
            }
        }
    }
    transitive_close(&mut twins);
    for g in 0..n {
        for h in 0..g {
            twins[g][h] = twins[h][g];
        }
    }

    let mut vote = vec![vec![false; n]; n];
    let mut coincident = vec![vec![false; n]; n];
    loop {
        apply_rules(profile, &twins, &mut before, &mut vote)?;
        for g in 0..n {
            for h in 0..n {
                if vote[g][h] && vote[h][g] {
                    coincident[g][h] = true;
                }
            }
        }
        let trial = loop {
            let mut trial = before.clone();
            for g in 0..n {
                for h in 0..n {
                    if vote[g][h] && !coincident[g][h] {
                        trial[g][h] = true;
                    }
                }
            }
            transitive_close(&mut trial);
            let cyclic: Vec<usize> = (0..n).filter(|&g| trial[g][g]).collect();
            if cyclic.is_empty() {
                break trial;
            }
            let mut progress = false;
            for &g in &cyclic {
                for &h in &cyclic {
                    if twins[g][h] && !coincident[g][h] {
                        coincident[g][h] = true;
                        progress = true;
                    }
                }
            }
            if !progress {
                return Err(Error::inconsistent(format!(
                    "item {} would have to lie left of itself",
                    cyclic[0] + 1
                )));
            }
        };
        if trial == before {
            return Ok(PairOrder { before, coincident });
        }
        before = trial;
    }
}

/// The disagreement and side rules with transitive closure, to a fixpoint.
/// Side-rule conclusions about possible twins go to `vote` instead.
fn apply_rules(
    profile: &OrdinalProfile,
    twins: &[Vec<bool>],
    before: &mut [Vec<bool>],
    vote: &mut [Vec<bool>],
) -> Result<()> {
    let n = profile.n();
    let tops: Vec<usize> = (0..n).map(|a| profile.top(a)).collect();
    let count = |m: &[Vec<bool>]| m.iter().flatten().filter(|&&b| b).count();
    let mut known = count(before) + count(vote);
    loop {
        for a in 0..n {
            for b in 0..n {
                if !before[tops[a]][tops[b]] {
                    continue;
                }
                let ra = profile.ranking(a);
                for (i, &g) in ra.iter().enumerate() {
                    for &h in &ra[i + 1..] {
                        if profile.prefers(b, h, g) {
                            before[g][h] = true;
                        }
                    }
                }
            }
        }
        for a in 0..n {
            let t = tops[a];
            let ra = profile.ranking(a);
            for (i, &g) in ra.iter().enumerate() {
                for &h in &ra[i + 1..] {
                    let (left, right) = if before[g][t] && before[h][t] {
                        (h, g)
                    } else if before[t][g] && before[t][h] {
                        (g, h)
                    } else {
                        continue;
                    };
                    if twins[g][h] {
                        vote[left][right] = true;
                    } else {
                        before[left][right] = true;
                    }
                }
            }
        }
        transitive_close(before);
        if let Some(g) = (0..n).find(|&g| before[g][g]) {
            return Err(Error::inconsistent(format!(
                "item {} would have to lie left of itself",
                g + 1
            )));
        }
        let now = count(before) + count(vote);
        if now == known {
            return Ok(());
        }
        known = now;
    }
}

/// Completes the order of `g_in` by searching single-peaked axes over the
/// inner items that extend `before`, accepting the first one some line
/// embedding realizes.
fn fallback_order(
    profile: &OrdinalProfile,
    g_in: &[usize],
    before: &[Vec<bool>],
    cap: usize,
) -> Result<(Vec<usize>, FallbackStage)> {
    let m = g_in.len();
    let unresolved = (0..m)
        .filter(|&i| (0..m).any(|j| i != j && !before[g_in[i]][g_in[j]] && !before[g_in[j]][g_in[i]]))
        .count();
    if unresolved > cap {
        return Err(Error::FallbackCap { unresolved, cap });
    }
    if m > 128 {
        return Err(Error::domain(format!("{m} inner items is too many for the ordering fallback")));
    }
    log::info!(
        "pairwise rules left {unresolved} of {m} inner items unordered; searching axes (n = {})",
        profile.n()
    );

    let mut local = vec![usize::MAX; profile.n()];
    for (i, &g) in g_in.iter().enumerate() {
        local[g] = i;
    }
    let rankings: Vec<Vec<usize>> = profile
        .rankings()
        .iter()
        .map(|r| r.iter().filter(|&&g| local[g] != usize::MAX).map(|&g| local[g]).collect())
        .collect();
    let lt: Vec<Vec<bool>> = (0..m)
        .map(|i| (0..m).map(|j| before[g_in[i]][g_in[j]]).collect())
        .collect();

    match AxisSearch::new(&rankings, &lt, Some(STRICT_LEAF_BUDGET)).run() {
        Outcome::Found(axis) => return Ok((axis.into_iter().map(|i| g_in[i]).collect(), FallbackStage::Strict)),
        Outcome::Exhausted => log::info!("strict axis search gave up after {STRICT_LEAF_BUDGET} candidates"),
        _ => {}
    }

    // Coincident items are invisible to the strict search. Merge runs that
    // every ranking keeps adjacent in ascending id order and retry.
    let mut next = vec![None; m];
    let mut has_prev = vec![false; m];
    for u in 0..m {
        for v in 0..m {
            let twins = u != v
                && g_in[u] < g_in[v]
                && !lt[v][u]
                && rankings
                    .iter()
                    .all(|r| r.windows(2).any(|w| w[0] == u && w[1] == v));
            if twins {
                next[u] = Some(v);
                has_prev[v] = true;
            }
        }
    }
    let classes: Vec<Vec<usize>> = (0..m)
        .filter(|&u| !has_prev[u])
        .map(|u| {
            let mut class = vec![u];
            while let Some(v) = next[*class.last().unwrap()] {
                class.push(v);
            }
            class
        })
        .collect();
    if classes.len() < m {
        let mut class_of = vec![0; m];
        for (c, members) in classes.iter().enumerate() {
            for &u in members {
                class_of[u] = c;
            }
        }
        let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
        let k = classes.len();
        let merged: Vec<Vec<usize>> = rankings
            .iter()
            .map(|r| r.iter().filter(|u| reps.contains(u)).map(|&u| class_of[u]).collect())
            .collect();
        let mut clt = vec![vec![false; k]; k];
        for u in 0..m {
            for v in 0..m {
                if lt[u][v] && class_of[u] != class_of[v] {
                    clt[class_of[u]][class_of[v]] = true;
                }
            }
        }
        transitive_close(&mut clt);
        if (0..k).all(|c| !clt[c][c]) {
            if let Outcome::Found(axis) = AxisSearch::new(&merged, &clt, None).run() {
                let items = separate_twins(&rankings, axis.iter().map(|&c| classes[c].clone()).collect())
                    .into_iter()
                    .map(|u| g_in[u])
                    .collect();
                return Ok((items, FallbackStage::Merged));
            }
        }
    }
    Err(Error::inconsistent(
        "no line embedding realizes the rankings restricted to the inner items",
    ))
}

fn transitive_close(rel: &mut [Vec<bool>]) {
    let n = rel.len();
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
}

enum Outcome {
    Found(Vec<usize>),
    NoAxis,
    Rejected,
    Exhausted,
}

/// Depth-first search over axes of `0..m`, filling from both ends. The
/// items some ranking puts last among the remaining ones must sit at an end.
struct AxisSearch<'a> {
    rankings: &'a [Vec<usize>],
    lt: &'a [Vec<bool>],
    m: usize,
    dead: HashSet<u128>,
    budget: Option<usize>,
}

impl<'a> AxisSearch<'a> {
    fn new(rankings: &'a [Vec<usize>], lt: &'a [Vec<bool>], budget: Option<usize>) -> Self {
        AxisSearch {
            rankings,
            lt,
            m: lt.len(),
            dead: HashSet::new(),
            budget,
        }
    }

    fn run(mut self) -> Outcome {
        let all = if self.m == 128 { u128::MAX } else { (1u128 << self.m) - 1 };
        self.dfs(all, &mut Vec::new(), &mut Vec::new())
    }

    fn can_go_left(&self, rest: u128, u: usize) -> bool {
        (0..self.m).all(|w| rest & (1 << w) == 0 || !self.lt[w][u])
    }

    fn can_go_right(&self, rest: u128, u: usize) -> bool {
        (0..self.m).all(|w| rest & (1 << w) == 0 || !self.lt[u][w])
    }

    fn dfs(&mut self, rest: u128, left: &mut Vec<usize>, right: &mut Vec<usize>) -> Outcome {
        if rest == 0 {
            match &mut self.budget {
                Some(0) => return Outcome::Exhausted,
                Some(b) => *b -= 1,
                None => {}
            }
            let axis: Vec<usize> = left.iter().chain(right.iter().rev()).copied().collect();
            return if realizable(self.rankings, &axis) {
                Outcome::Found(axis)
            } else {
                Outcome::Rejected
            };
        }
        if self.dead.contains(&rest) {
            return Outcome::NoAxis;
        }
        let mut lasts: Vec<usize> = Vec::new();
        for r in self.rankings {
            let last = *r.iter().rev().find(|&&u| rest & (1 << u) != 0).expect("rest is non-empty");
            if !lasts.contains(&last) {
                lasts.push(last);
            }
        }
        lasts.sort_unstable();

        // Each move places items at the left end and/or the right end.
        let mut moves: Vec<(Option<usize>, Option<usize>)> = Vec::new();
        match lasts.as_slice() {
            [u] if rest.count_ones() == 1 => moves.push((Some(*u), None)),
            [u] => {
                moves.push((Some(*u), None));
                moves.push((None, Some(*u)));
            }
            [u, v] => {
                moves.push((Some(*u), Some(*v)));
                moves.push((Some(*v), Some(*u)));
            }
            _ => {}
        }

        let mut any_axis = false;
        for (l, r) in moves {
            let mut next = rest;
            if let Some(u) = l {
                if !self.can_go_left(next & !(1 << u), u) {
                    continue;
                }
                next &= !(1 << u);
            }
            if let Some(u) = r {
                if !self.can_go_right(next & !(1 << u), u) {
                    continue;
                }
                next &= !(1 << u);
            }
            left.extend(l);
            right.extend(r);
            let outcome = self.dfs(next, left, right);
            if l.is_some() {
                left.pop();
            }
            if r.is_some() {
                right.pop();
            }
            match outcome {
                Outcome::Found(axis) => return Outcome::Found(axis),
                Outcome::Exhausted => return Outcome::Exhausted,
                Outcome::Rejected => any_axis = true,
                Outcome::NoAxis => {}
            }
        }
        if any_axis {
            Outcome::Rejected
        } else {
            self.dead.insert(rest);
            Outcome::NoAxis
        }
    }
}

/// Exact test for a line embedding with the items at strictly increasing
/// points in `axis` order that induces every ranking, including the rule
/// that a tie goes to the item with the smaller coordinate.
fn realizable(rankings: &[Vec<usize>], axis: &[usize]) -> bool {
    let blocks: Vec<Block> = axis.iter().map(|&u| Block { members: vec![u], together: false }).collect();
    realizable_blocks(rankings, &blocks)
}

/// A run of consecutive axis items, either sharing one point or spread out
/// in the listed order.
#[derive(Debug, Clone)]
struct Block {
    members: Vec<usize>,
    together: bool,
}

/// [`realizable`] where the items of a `together` block share a point.
/// Rankings must list such items consecutively in ascending id, which is
/// how coincident items are ranked.
///
/// Variables are the item points followed by the agent points; all are
/// nonnegative, which loses nothing since embeddings can be translated,
/// and strict inequalities become `>= 1` since they can be scaled.
fn realizable_blocks(rankings: &[Vec<usize>], blocks: &[Block]) -> bool {
    let axis: Vec<usize> = blocks.iter().flat_map(|b| b.members.iter().copied()).collect();
    let m = axis.len();
    let mut pos = vec![0; m];
    let mut block_of = vec![0; m];
    for (p, &u) in axis.iter().enumerate() {
        pos[u] = p;
    }
    for (i, b) in blocks.iter().enumerate() {
        for &u in &b.members {
            block_of[u] = i;
        }
    }
    let shared = |g: usize, h: usize| block_of[g] == block_of[h] && blocks[block_of[g]].together;
    let mut cons = Vec::new();
    for w in axis.windows(2) {
        let rel = if shared(w[0], w[1]) { Relation::Eq } else { Relation::Ge };
        let rhs = i64::from(rel == Relation::Ge);
        cons.push(Constraint::new(vec![(w[1], 1), (w[0], -1)], rel, rhs));
    }
    for (a, r) in rankings.iter().enumerate() {
        let y = m + a;
        for w in r.windows(2) {
            let (g, h) = (w[0], w[1]);
            if shared(g, h) {
                continue;
            }
            let terms = vec![(y, 2), (g, -1), (h, -1)];
            if pos[g] < pos[h] {
                cons.push(Constraint::new(terms, Relation::Le, 0));
            } else {
                cons.push(Constraint::new(terms, Relation::Ge, 1));
            }
        }
    }
    lp::feasible(m + rankings.len(), &cons)
}

/// Twin classes are placed as single points by the merged search. Items
/// that every agent ranks consecutively may still be distinct points, all
/// on one side of the agents, and then their order is fixed. Pull each
/// class apart in whichever direction stays realizable and keep it as one
/// point only if neither does.
fn separate_twins(rankings: &[Vec<usize>], classes: Vec<Vec<usize>>) -> Vec<usize> {
    let mut blocks: Vec<Block> = classes
        .into_iter()
        .map(|members| Block {
            together: members.len() > 1,
            members,
        })
        .collect();
    for i in 0..blocks.len() {
        if !blocks[i].together {
            continue;
        }
        let ascending = blocks[i].members.clone();
        let mut descending = ascending.clone();
        descending.reverse();
        for members in [ascending, descending] {
            let mut trial = blocks.clone();
            trial[i] = Block {
                members,
                together: false,
            };
            if realizable_blocks(rankings, &trial) {
                blocks = trial;
                break;
            }
        }
    }
    blocks.into_iter().flat_map(|b| b.members).collect()
}

/// Runs the algorithm with the anchor pair that maximizes `|G_in|`.
pub fn order_match(profile: &OrdinalProfile) -> Result<Matching> {
    Ok(order_match_run(profile, RecoveryOptions::default())?.matching)
}

pub fn order_match_run(profile: &OrdinalProfile, options: RecoveryOptions) -> Result<OrderMatchRun> {
    let partition = build_partition(profile)?;
    finish(profile, partition, options)
}

/// The same algorithm with arbitrary valid anchors instead of the maximizer.
pub fn order_match_naive(profile: &OrdinalProfile, anchors: (usize, usize)) -> Result<Matching> {
    Ok(order_match_naive_run(profile, anchors, RecoveryOptions::default())?.matching)
}

pub fn order_match_naive_run(
    profile: &OrdinalProfile,
    anchors: (usize, usize),
    options: RecoveryOptions,
) -> Result<OrderMatchRun> {
    let partition = partition_with_anchors(profile, anchors)?;
    finish(profile, partition, options)
}

fn finish(profile: &OrdinalProfile, partition: Partition, options: RecoveryOptions) -> Result<OrderMatchRun> {
    let n = profile.n();
    if !partition.g_in.is_empty() {
        if let Some(a) = (0..n).find(|&a| !partition.contains(profile.top(a))) {
            return Err(Error::inconsistent(format!(
                "favourite item {} of agent {} lies outside the inner items",
                profile.top(a) + 1,
                a + 1
            )));
        }
    }
    let item_order = recover_item_order_with(profile, &partition, options)?;

    let mut agent_order = Vec::with_capacity(n);
    for &g in &item_order.items {
        agent_order.extend((0..n).filter(|&a| profile.top(a) == g));
    }

    let mut item_of = vec![usize::MAX; n];
    for (&g, &a) in item_order.items.iter().zip(&agent_order) {
        item_of[a] = g;
    }
    let free_agents = (0..n).filter(|&a| item_of[a] == usize::MAX).collect::<Vec<_>>();
    for (&g, a) in partition.g_out.iter().zip(free_agents) {
        item_of[a] = g;
    }
    let matching = Matching::new(item_of).map_err(|_| Error::invariant("matching is incomplete"))?;
    Ok(OrderMatchRun {
        partition,
        item_order,
        agent_order,
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_profile, Instance};

    fn profile_of(agents: &[i64], items: &[i64]) -> OrdinalProfile {
        derive_profile(&Instance::from_ints(agents, items).unwrap())
    }

    #[test]
    fn single_agent() {
        let p = profile_of(&[4], &[1]);
        assert_eq!(order_match(&p).unwrap().as_slice(), &[0]);
    }

    #[test]
    fn common_ranking_has_one_extreme() {
        let p = OrdinalProfile::new(vec![vec![2, 0, 1]; 3]).unwrap();
        assert_eq!(identify_extremes(&p).unwrap(), (2, 2));
        let part = build_partition(&p).unwrap();
        assert!(part.g_in.is_empty());
        assert_eq!(part.g_out, vec![0, 1, 2]);
        // G_out goes out by ascending ids
        assert_eq!(order_match(&p).unwrap().as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn three_last_items_are_rejected() {
        let p = OrdinalProfile::new(vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert!(matches!(identify_extremes(&p), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn spread_instance_is_ordered_by_rules() {
        // items 0..5 at 0,10,20,30,40; agents sit on them
        let p = profile_of(&[1, 11, 21, 31, 39], &[0, 10, 20, 30, 40]);
        let part = build_partition(&p).unwrap();
        assert_eq!((part.g_ell, part.g_r), (0, 4));
        let order = recover_item_order(&p, &part).unwrap();
        assert_eq!(order.items, vec![0, 1, 2, 3, 4]);
        assert_eq!(order.fallback, None);
        assert_eq!(order_match(&p).unwrap().as_slice(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn fallback_alone_orders_items_beyond_the_agents() {
        let agents = [5, 20, 21, 22];
        let items = [5, 20, 0, 1];
        let p = profile_of(&agents, &items);
        let part = build_partition(&p).unwrap();
        let inst = Instance::from_ints(&agents, &items).unwrap();
        let ruled = recover_item_order(&p, &part).unwrap();
        assert_eq!(ruled.fallback, None);
        let options = RecoveryOptions {
            pairwise_rules: false,
            ..RecoveryOptions::default()
        };
        let order = recover_item_order_with(&p, &part, options).unwrap();
        assert!(order.fallback.is_some());
        let xs: Vec<_> = order.items.iter().map(|&g| inst.item(g).clone()).collect();
        assert!(xs.windows(2).all(|w| w[0] <= w[1]) || xs.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(order.items, ruled.items);
    }

    #[test]
    fn anchors_are_validated() {
        let p = profile_of(&[1, 11, 21], &[0, 10, 20]);
        assert!(partition_with_anchors(&p, (0, 2)).is_ok());
        assert!(partition_with_anchors(&p, (2, 0)).is_ok());
        assert!(matches!(partition_with_anchors(&p, (0, 1)), Err(Error::Domain(_))));
        assert!(matches!(partition_with_anchors(&p, (0, 7)), Err(Error::Domain(_))));
    }

    #[test]
    fn argmax_anchors_give_the_same_run() {
        let p = profile_of(&[1, 2, 11, 19, 21], &[0, 10, 20, 3, 15]);
        let part = build_partition(&p).unwrap();
        let a = order_match(&p).unwrap();
        let b = order_match_naive(&p, (part.a_ell, part.a_r)).unwrap();
        assert_eq!(a, b);
    }
}
