use std::collections::VecDeque;
use std::fmt;

use crate::query::{Query, VarId};

/// Set of query variables as a bitmask over [`VarId`]s.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct VarSet(pub u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn single(v: VarId) -> VarSet {
        VarSet(1 << v)
    }

    /// All ids in `0..n`.
    pub fn prefix(n: usize) -> VarSet {
        if n >= 64 {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn from_ids(ids: impl IntoIterator<Item = VarId>) -> VarSet {
        ids.into_iter().fold(VarSet::EMPTY, |s, v| s.with(v))
    }

    pub fn with(self, v: VarId) -> VarSet {
        VarSet(self.0 | 1 << v)
    }

    pub fn without(self, v: VarId) -> VarSet {
        VarSet(self.0 & !(1 << v))
    }

    pub fn contains(self, v: VarId) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersect(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn minus(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in increasing id order.
    pub fn iter(self) -> impl Iterator<Item = VarId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub vertices: VarSet,
    pub edges: Vec<VarSet>,
}

impl Hypergraph {
    pub fn new(edges: Vec<VarSet>) -> Hypergraph {
        let vertices = edges.iter().fold(VarSet::EMPTY, |a, e| a.union(*e));
        Hypergraph { vertices, edges }
    }

    /// One edge per atom.
    pub fn of_query(q: &Query) -> Hypergraph {
        Hypergraph::new(
            (0..q.atoms.len())
                .map(|a| VarSet::from_ids(q.atom_var_ids(a)))
                .collect(),
        )
    }

    /// Atom edges plus one edge holding exactly the head variables (last index).
    pub fn of_query_with_head(q: &Query) -> Hypergraph {
        let mut h = Hypergraph::of_query(q);
        h.edges.push(VarSet::prefix(q.head_len()));
        h
    }

    /// Atom edges restricted to head variables.
    pub fn head_restricted(q: &Query) -> Hypergraph {
        let head = VarSet::prefix(q.head_len());
        Hypergraph::new(
            Hypergraph::of_query(q)
                .edges
                .into_iter()
                .map(|e| e.intersect(head))
                .collect(),
        )
    }
}

/// A join tree over the edges of a hypergraph; node `i` is edge `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinTree {
    pub edges: Vec<VarSet>,
    pub parent: Vec<Option<usize>>,
}

impl JoinTree {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    /// Shared variables between `node` and its parent.
    pub fn separator(&self, node: usize) -> Option<VarSet> {
        self.parent[node].map(|p| self.edges[node].intersect(self.edges[p]))
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(c, p)| p.map(|p| (c, p)))
    }

    /// Re-roots the tree at `root`: returns parent links and a preorder
    /// (parents before children).
    pub fn rooted_at(&self, root: usize) -> (Vec<Option<usize>>, Vec<usize>) {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for (c, p) in self.tree_edges() {
            adj[c].push(p);
            adj[p].push(c);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut preorder = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            preorder.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        (parent, preorder)
    }

    /// For every variable, the nodes containing it form a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        let all = self.edges.iter().fold(VarSet::EMPTY, |a, e| a.union(*e));
        all.iter().all(|v| {
            let nodes = self.edges.iter().filter(|e| e.contains(v)).count();
            let links = self
                .tree_edges()
                .filter(|&(c, p)| self.edges[c].contains(v) && self.edges[p].contains(v))
                .count();
            links + 1 == nodes
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GyoOutcome {
    Tree(JoinTree),
    /// The irreducible residue left once no ear can be removed.
    Cyclic(Vec<VarSet>),
}

impl GyoOutcome {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, GyoOutcome::Tree(_))
    }

    pub fn tree(self) -> Option<JoinTree> {
        match self {
            GyoOutcome::Tree(t) => Some(t),
            GyoOutcome::Cyclic(_) => None,
        }
    }
}

/// GYO ear removal. Alternates deleting vertices that occur in a single live
/// edge with deleting one edge contained in another; each containment becomes
/// a tree link. Lowest indices go first, so the tree is deterministic.
pub fn gyo_join_tree(h: &Hypergraph) -> GyoOutcome {
    let m = h.edges.len();
    let mut work = h.edges.clone();
    let mut alive = vec![true; m];
    let mut parent = vec![None; m];
    let mut live = m;
    while live > 1 {
        for v in h.vertices.iter() {
            let mut holders = (0..m).filter(|&i| alive[i] && work[i].contains(v));
            if let (Some(only), None) = (holders.next(), holders.next()) {
                work[only] = work[only].without(v);
            }
        }
        let ear = (0..m).filter(|&i| alive[i]).find_map(|i| {
            (0..m)
                .find(|&j| j != i && alive[j] && work[i].is_subset(work[j]))
                .map(|j| (i, j))
        });
        match ear {
            Some((i, j)) => {
                alive[i] = false;
                parent[i] = Some(j);
                live -= 1;
            }
            None => {
                return GyoOutcome::Cyclic((0..m).filter(|&i| alive[i]).map(|i| work[i]).collect());
            }
        }
    }
    GyoOutcome::Tree(JoinTree {
        edges: h.edges.clone(),
        parent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeConnex {
    pub acyclic: bool,
    pub free_connex: bool,
}

pub fn check_free_connex(q: &Query) -> FreeConnex {
    let acyclic = gyo_join_tree(&Hypergraph::of_query(q)).is_acyclic();
    let free_connex = acyclic && gyo_join_tree(&Hypergraph::of_query_with_head(q)).is_acyclic();
    FreeConnex { acyclic, free_connex }
}
