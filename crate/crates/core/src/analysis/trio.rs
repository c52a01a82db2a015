use rustc_hash::FxHashSet;

use super::hypergraph::{Hypergraph, VarSet};
use crate::query::{Query, VarId};

/// Primal-graph adjacency among head variables: two head variables are
/// adjacent when some atom contains both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<VarSet>,
}

impl Adjacency {
    pub fn of_query(q: &Query) -> Adjacency {
        Adjacency::of_edges(q.head_len(), &Hypergraph::head_restricted(q).edges)
    }

    pub fn of_edges(vars: usize, edges: &[VarSet]) -> Adjacency {
        let mut neighbors = vec![VarSet::EMPTY; vars];
        for e in edges {
            for v in e.iter().filter(|&v| v < vars) {
                neighbors[v] = neighbors[v].union(*e).without(v);
            }
        }
        let mask = VarSet::prefix(vars);
        for n in &mut neighbors {
            *n = n.intersect(mask);
        }
        Adjacency { neighbors }
    }

    pub fn adjacent(&self, a: VarId, b: VarId) -> bool {
        self.neighbors[a].contains(b)
    }

    pub fn neighbors(&self, v: VarId) -> VarSet {
        self.neighbors[v]
    }

    pub fn vars(&self) -> usize {
        self.neighbors.len()
    }

    /// True when appending `next` after the variables in `placed` creates a
    /// trio ending in `next`: two placed, mutually non-adjacent neighbors.
    fn closes_trio(&self, placed: VarSet, next: VarId) -> bool {
        let before = self.neighbors[next].intersect(placed);
        before.iter().any(|x| !before.without(x).is_subset(self.neighbors[x]))
    }
}

/// Lexicographically first (by positions in `order`) triple `(x1, x2, x3)`
/// with `x1` before `x2` before `x3`, `x3` adjacent to both and `x1`, `x2`
/// non-adjacent.
pub fn find_disruptive_trio(adj: &Adjacency, order: &[VarId]) -> Option<(VarId, VarId, VarId)> {
    let f = order.len();
    for i in 0..f {
        for j in i + 1..f {
            let (x1, x2) = (order[i], order[j]);
            if adj.adjacent(x1, x2) {
                continue;
            }
            if let Some(&x3) = order[j + 1..]
                .iter()
                .find(|&&x3| adj.adjacent(x1, x3) && adj.adjacent(x2, x3))
            {
                return Some((x1, x2, x3));
            }
        }
    }
    None
}

/// Extends the lex prefix `prefix` to a trio-free order over all head
/// variables, trying candidates in head order. `None` when no extension exists.
pub fn complete_order(adj: &Adjacency, prefix: &[VarId]) -> Option<Vec<VarId>> {
    let mut placed = VarSet::EMPTY;
    for &v in prefix {
        if adj.closes_trio(placed, v) {
            return None;
        }
        placed = placed.with(v);
    }
    let mut order = prefix.to_vec();
    // Whether `next` closes a trio depends only on the placed set, so dead
    // sets can be memoised.
    let mut dead = FxHashSet::default();
    if extend(adj, placed, &mut order, &mut dead) {
        Some(order)
    } else {
        None
    }
}

fn extend(adj: &Adjacency, placed: VarSet, order: &mut Vec<VarId>, dead: &mut FxHashSet<VarSet>) -> bool {
    if order.len() == adj.vars() {
        return true;
    }
    if dead.contains(&placed) {
        return false;
    }
    for v in 0..adj.vars() {
        if placed.contains(v) || adj.closes_trio(placed, v) {
            continue;
        }
        order.push(v);
        if extend(adj, placed.with(v), order, dead) {
            return true;
        }
        order.pop();
    }
    dead.insert(placed);
    false
}
