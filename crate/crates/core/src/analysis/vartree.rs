use super::hypergraph::{Hypergraph, VarSet};
use super::trio::Adjacency;
use crate::error::{Error, Result};
use crate::query::{Query, VarId};

/// One layer of the variable tree: the `i`-th variable of the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarNode {
    pub var: VarId,
    /// Earlier variables adjacent to `var`, sorted by position in the order.
    pub preceding: Vec<VarId>,
    /// Position (in the order) of the latest preceding neighbour.
    pub parent: Option<usize>,
    /// Lowest-index atom whose head variables cover `{var} ∪ preceding`.
    pub anchor: usize,
    /// Atoms whose deepest head variable (in the order) is `var`.
    pub assigned: Vec<usize>,
}

/// Layered tree over a trio-free full order of the head variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableTree {
    pub order: Vec<VarId>,
    pub nodes: Vec<VarNode>,
    /// Atoms with no head variable at all; they contribute a scalar factor.
    pub unassigned: Vec<usize>,
}

impl VariableTree {
    /// Builds the tree over the head-restricted atom edges of `q`.
    pub fn build(q: &Query, order: &[VarId]) -> Result<VariableTree> {
        let edges = Hypergraph::head_restricted(q).edges;
        VariableTree::from_edges(q.head_len(), &edges, order)
    }

    pub fn from_edges(vars: usize, edges: &[VarSet], order: &[VarId]) -> Result<VariableTree> {
        if order.len() != vars || VarSet::from_ids(order.iter().copied()) != VarSet::prefix(vars) {
            return Err(Error::Internal(
                "variable order is not a permutation of the head".into(),
            ));
        }
        let adj = Adjacency::of_edges(vars, edges);
        let mut position = vec![0; vars];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut nodes = Vec::with_capacity(vars);
        for (i, &v) in order.iter().enumerate() {
            let preceding: Vec<VarId> = order[..i].iter().copied().filter(|&u| adj.adjacent(u, v)).collect();
            for (a, &x) in preceding.iter().enumerate() {
                if preceding[a + 1..].iter().any(|&y| !adj.adjacent(x, y)) {
                    return Err(Error::Internal(format!(
                        "preceding neighbours of variable {v} do not form a clique"
                    )));
                }
            }
            let cover = VarSet::from_ids(preceding.iter().copied()).with(v);
            let anchor = edges
                .iter()
                .position(|e| cover.is_subset(*e))
                .ok_or_else(|| Error::Internal(format!("no atom covers variable {v} and its neighbours")))?;
            nodes.push(VarNode {
                var: v,
                parent: preceding.last().map(|&u| position[u]),
                preceding,
                anchor,
                assigned: Vec::new(),
            });
        }
        let mut unassigned = Vec::new();
        for (a, e) in edges.iter().enumerate() {
            match e.iter().map(|v| position[v]).max() {
                Some(deepest) => nodes[deepest].assigned.push(a),
                None => unassigned.push(a),
            }
        }
        Ok(VariableTree {
            order: order.to_vec(),
            nodes,
            unassigned,
        })
    }

    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (i + 1..self.nodes.len()).filter(move |&c| self.nodes[c].parent == Some(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    #[test]
    fn three_path_layers() {
        let q = parse_query("Q(A,B,C,D) :- R(A,B), S(B,C), T(C,D).").unwrap();
        let t = VariableTree::build(&q, &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.nodes[0].parent, None);
        assert_eq!(t.nodes[1].preceding, [0]);
        assert_eq!(t.nodes[2].preceding, [1]);
        assert_eq!(t.nodes[2].parent, Some(1));
        assert_eq!(t.nodes[3].anchor, 2);
        assert_eq!(t.nodes[1].assigned, [0]);
        assert_eq!(t.nodes[0].assigned, Vec::<usize>::new());
        assert_eq!(t.children(1).collect::<Vec<_>>(), [2]);
    }

    #[test]
    fn middle_first_order_branches() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
        let t = VariableTree::build(&q, &[1, 0, 2]).unwrap();
        assert_eq!(t.children(0).collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn rejects_trio_order() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
        assert!(matches!(VariableTree::build(&q, &[0, 2, 1]), Err(Error::Internal(_))));
    }

    #[test]
    fn existential_only_atoms_are_unassigned() {
        let q = parse_query("Q(A) :- R(A,B), S(B,C), U(D).").unwrap();
        let t = VariableTree::build(&q, &[0]).unwrap();
        assert_eq!(t.unassigned, [1, 2]);
        assert_eq!(t.nodes[0].assigned, [0]);
    }
}
