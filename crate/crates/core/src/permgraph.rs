//! Permutation graphs: how a matching `M` permutes the items of `M*`.
//!
//! Node `i` has a single edge to the agent `j` whose optimal item `M(i)`
//! is, i.e. `M(i) = M*(j)`. The edge costs `d(i, M*(j))`, so the graph
//! carries exactly the costs of `M`. Labels and edge kinds need the true
//! coordinates; this is an analysis tool, not something the ordinal
//! algorithm can compute.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{self, derive_profile, Instance, Matching, OrdinalProfile};
use crate::ordermatch::{build_partition, Partition};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeLabel {
    /// `M*(a)` is an inner item and `top(a)` is the `x`-th inner item
    /// from the left (0-based).
    Inner(usize),
    /// `M*(a)` is an outer item left of every inner item.
    OutLeft,
    /// `M*(a)` is an outer item right of the inner items.
    OutRight,
}

impl NodeLabel {
    pub fn is_inner(self) -> bool {
        matches!(self, NodeLabel::Inner(_))
    }

    pub fn name(self) -> String {
        match self {
            NodeLabel::Inner(x) => format!("A_{}", x + 1),
            NodeLabel::OutLeft => "A_out^l".to_string(),
            NodeLabel::OutRight => "A_out^r".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Forward,
    Backward,
    Internal,
    Inward,
    /// Inner to outer, or outer to outer.
    Other,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Forward => "forward",
            EdgeKind::Backward => "backward",
            EdgeKind::Internal => "internal",
            EdgeKind::Inward => "inward",
            EdgeKind::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGraph {
    next: Vec<usize>,
    labels: Vec<NodeLabel>,
    opt: Matching,
}

impl PermutationGraph {
    pub fn n(&self) -> usize {
        self.next.len()
    }

    /// Head of the edge leaving `agent`.
    pub fn next(&self, agent: usize) -> usize {
        self.next[agent]
    }

    pub fn label(&self, agent: usize) -> NodeLabel {
        self.labels[agent]
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn optimal(&self) -> &Matching {
        &self.opt
    }

    pub fn kind(&self, tail: usize, head: usize) -> EdgeKind {
        match (self.labels[tail], self.labels[head]) {
            (NodeLabel::Inner(x), NodeLabel::Inner(y)) if x < y => EdgeKind::Forward,
            (NodeLabel::Inner(x), NodeLabel::Inner(y)) if x > y => EdgeKind::Backward,
            (NodeLabel::Inner(_), NodeLabel::Inner(_)) => EdgeKind::Internal,
            (_, NodeLabel::Inner(_)) => EdgeKind::Inward,
            _ => EdgeKind::Other,
        }
    }

    /// `(tail, head, kind)` for every agent, in tail order.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeKind)> {
        (0..self.n()).map(|i| (i, self.next[i], self.kind(i, self.next[i]))).collect()
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges().iter().filter(|e| e.2 == kind).count()
    }

    /// The matching the graph encodes.
    pub fn matching(&self) -> Matching {
        Matching::new(self.next.iter().map(|&j| self.opt.item_of(j)).collect()).expect("permutation")
    }

    pub fn edge_cost(&self, instance: &Instance, tail: usize, head: usize) -> Rational {
        instance.distance(tail, self.opt.item_of(head))
    }

    pub fn cost_per_k(&self, instance: &Instance) -> Result<Vec<Rational>> {
        model::cost_per_k(instance, &self.matching())
    }

    /// In- and out-degree one everywhere.
    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.n()];
        self.next.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }

    /// Graphviz text; nodes are 1-based agent ids.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph permutation {\n");
        for (i, label) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "  a{0} [label=\"a{0}\\n{1}\"];", i + 1, label.name());
        }
        for (i, j, kind) in self.edges() {
            let _ = writeln!(s, "  a{} -> a{} [label=\"{}\"];", i + 1, j + 1, kind.name());
        }
        s.push_str("}\n");
        s
    }
}

/// Graph of `m` against `M*`, labelled with the partition the algorithm
/// itself would build from the instance's derived profile.
pub fn build_graph(instance: &Instance, m: &Matching) -> Result<PermutationGraph> {
    let partition = build_partition(&derive_profile(instance))?;
    build_graph_with(instance, m, &partition)
}

pub fn build_graph_with(instance: &Instance, m: &Matching, partition: &Partition) -> Result<PermutationGraph> {
    let mut inner = partition.g_in.clone();
    inner.sort_by(|&g, &h| (instance.item(g), g).cmp(&(instance.item(h), h)));
    build_graph_ordered(instance, &derive_profile(instance), m, partition, &inner)
}

/// Like [`build_graph_with`], but favourites come from `profile` and
/// coincident inner items take the order given in `inner`, which must list
/// the inner items left to right.
pub fn build_graph_ordered(
    instance: &Instance,
    profile: &OrdinalProfile,
    m: &Matching,
    partition: &Partition,
    inner: &[usize],
) -> Result<PermutationGraph> {
    let n = instance.n();
    if m.n() != n {
        return Err(Error::domain("matching and instance sizes differ"));
    }
    let mut sorted = inner.to_vec();
    sorted.sort_unstable();
    let mut expected = partition.g_in.clone();
    expected.sort_unstable();
    if sorted != expected || inner.windows(2).any(|w| instance.item(w[0]) > instance.item(w[1])) {
        return Err(Error::domain("inner order must list the inner items left to right"));
    }
    if profile.n() != n {
        return Err(Error::domain("profile and instance sizes differ"));
    }
    let span = inner.first().map(|&l| (instance.item(l), instance.item(*inner.last().expect("non-empty"))));
    let side = |g: usize| match span {
        Some((_, right)) if instance.item(g) > right => NodeLabel::OutRight,
        Some((left, _)) if instance.item(g) > left => NodeLabel::OutRight,
        _ => NodeLabel::OutLeft,
    };

    // An optimum that agrees with `inner` on coincident items: outer items
    // sharing a point with the inner ones go on their side of them.
    let mut slot = vec![0; n];
    for (p, &g) in inner.iter().enumerate() {
        slot[g] = p;
    }
    let bucket = |g: usize| {
        if partition.contains(g) {
            (1, slot[g])
        } else if side(g) == NodeLabel::OutLeft {
            (0, g)
        } else {
            (2, g)
        }
    };
    let mut items: Vec<usize> = (0..n).collect();
    items.sort_by(|&g, &h| (instance.item(g), bucket(g)).cmp(&(instance.item(h), bucket(h))));
    let mut item_of = vec![0; n];
    for (&a, &g) in instance.agents_left_to_right().iter().zip(&items) {
        item_of[a] = g;
    }
    let opt = Matching::new(item_of)?;

    let mut labels = Vec::with_capacity(n);
    for a in 0..n {
        let g = opt.item_of(a);
        let label = if partition.contains(g) {
            let top = profile.top(a);
            let x = inner.iter().position(|&h| h == top).ok_or_else(|| {
                Error::invariant(format!(
                    "agent {} has an inner optimal item but an outer favourite",
                    a + 1
                ))
            })?;
            NodeLabel::Inner(x)
        } else {
            side(g)
        };
        labels.push(label);
    }

    let owner = opt.agent_of_items();
    let next = (0..n).map(|i| owner[m.item_of(i)]).collect();
    Ok(PermutationGraph { next, labels, opt })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Swap {
    /// `(a_1, a_2)` and `(a_3, a_4)`.
    pub removed: [(usize, usize); 2],
    /// `(a_1, a_4)` and `(a_3, a_2)`.
    pub added: [(usize, usize); 2],
    /// The larger added edge costs at least the larger removed one.
    pub max_ok: bool,
    /// The added edges cost at least as much in total.
    pub sum_ok: bool,
    /// `SC_1..=SC_n` after the swap.
    pub cost_after: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub graph: PermutationGraph,
    pub cost_before: Vec<Rational>,
    pub swaps: Vec<Swap>,
}

impl Removal {
    pub fn iterations(&self) -> usize {
        self.swaps.len()
    }

    /// Every swap kept both local inequalities and no `SC_k` ever dropped.
    pub fn monotone(&self) -> bool {
        let mut prev = &self.cost_before;
        for s in &self.swaps {
            if !s.max_ok || !s.sum_ok || s.cost_after.iter().zip(prev).any(|(a, b)| a < b) {
                return false;
            }
            prev = &s.cost_after;
        }
        true
    }
}

fn top_index(graph: &PermutationGraph, a: usize) -> usize {
    match graph.label(a) {
        NodeLabel::Inner(x) => x,
        _ => unreachable!("forward edges join inner agents"),
    }
}

/// Exchanges edges until no forward edge is left: take the forward edge
/// `(a_3, a_4)` whose tail has the rightmost favourite (smallest tail on
/// ties), find a forward or inward edge `(a_1, a_2)` with
/// `top(a_2) = top(a_3)` (smallest `a_1`), and rewire to `(a_1, a_4)`,
/// `(a_3, a_2)`.
pub fn remove_forward_edges(graph: &PermutationGraph, instance: &Instance) -> Result<Removal> {
    let n = graph.n();
    if instance.n() != n {
        return Err(Error::domain("graph and instance sizes differ"));
    }
    if graph.count(EdgeKind::Backward) > 0 {
        return Err(Error::domain("the graph has backward edges"));
    }
    let mut g = graph.clone();
    let cost_before = g.cost_per_k(instance)?;
    let mut swaps = Vec::new();
    loop {
        let forward: Vec<usize> = (0..n).filter(|&i| g.kind(i, g.next[i]) == EdgeKind::Forward).collect();
        let Some(&a3) = forward.iter().max_by(|&&p, &&q| top_index(&g, p).cmp(&top_index(&g, q)).then(q.cmp(&p)))
        else {
            break;
        };
        if swaps.len() == n {
            return Err(Error::invariant(format!("forward edges remain after {n} swaps")));
        }
        let a4 = g.next[a3];
        let x3 = top_index(&g, a3);
        let a1 = (0..n)
            .find(|&i| {
                let j = g.next[i];
                matches!(g.kind(i, j), EdgeKind::Forward | EdgeKind::Inward) && g.label(j) == NodeLabel::Inner(x3)
            })
            .ok_or_else(|| {
                Error::invariant(format!(
                    "no forward or inward edge enters the favourite group of agent {}",
                    a3 + 1
                ))
            })?;
        let a2 = g.next[a1];
        let old = [g.edge_cost(instance, a1, a2), g.edge_cost(instance, a3, a4)];
        g.next[a1] = a4;
        g.next[a3] = a2;
        let new = [g.edge_cost(instance, a1, a4), g.edge_cost(instance, a3, a2)];
        let max_ok = new.iter().max() >= old.iter().max();
        let sum_ok = &new[0] + &new[1] >= &old[0] + &old[1];
        swaps.push(Swap {
            removed: [(a1, a2), (a3, a4)],
            added: [(a1, a4), (a3, a2)],
            max_ok,
            sum_ok,
            cost_after: g.cost_per_k(instance)?,
        });
    }
    Ok(Removal {
        graph: g,
        cost_before,
        swaps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeViolation {
    pub tail: usize,
    pub head: usize,
    pub cost: Rational,
    pub bound: Rational,
}

/// Edges with `d(i, M*(j)) > d(i, M*(i)) + 2 d(j, M*(j))`. Only defined
/// for graphs without forward and backward edges.
pub fn check_edge_bound(instance: &Instance, graph: &PermutationGraph) -> Result<Vec<EdgeViolation>> {
    if instance.n() != graph.n() {
        return Err(Error::domain("graph and instance sizes differ"));
    }
    if graph.count(EdgeKind::Forward) + graph.count(EdgeKind::Backward) > 0 {
        return Err(Error::domain("the graph still has forward or backward edges"));
    }
    let own = |a: usize| instance.distance(a, graph.opt.item_of(a));
    let mut out = Vec::new();
    for (i, j, _) in graph.edges() {
        let cost = graph.edge_cost(instance, i, j);
        let bound = own(i) + own(j) * Rational::from_integer(2.into());
        if cost > bound {
            out.push(EdgeViolation {
                tail: i,
                head: j,
                cost,
                bound,
            });
        }
    }
    Ok(out)
}

/// Inward edges leaving a right outer agent whose head's favourite is not
/// the rightmost favourite among inner agents.
pub fn check_inward_right(graph: &PermutationGraph) -> Vec<(usize, usize)> {
    let rightmost = graph
        .labels
        .iter()
        .filter_map(|l| match l {
            NodeLabel::Inner(x) => Some(*x),
            _ => None,
        })
        .max();
    graph
        .edges()
        .into_iter()
        .filter(|&(i, j, kind)| {
            kind == EdgeKind::Inward
                && graph.label(i) == NodeLabel::OutRight
                && matches!(graph.label(j), NodeLabel::Inner(x) if Some(x) < rightmost)
        })
        .map(|(i, j, _)| (i, j))
        .collect()
}
