//! Tractability analysis: acyclicity, free-connexity, disruptive trios and
//! order completion, and the routing decision built from them.

mod hypergraph;
mod trio;
mod vartree;

use serde::Serialize;

pub use hypergraph::{check_free_connex, gyo_join_tree, FreeConnex, GyoOutcome, Hypergraph, JoinTree, VarSet};
pub use trio::{complete_order, find_disruptive_trio, Adjacency};
pub use vartree::{VarNode, VariableTree};

use crate::query::{OrderKind, OrderSpec, Query, VarId};

/// An order made total: the requested ranking plus a deterministic
/// tie-break covering every head variable.
///
/// Lex orders rank by `sequence` lexicographically. Sum orders rank by the
/// sum of `weights`, then lexicographically by `sequence`, which starts with
/// the anchor atom's head variables in head order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedOrder {
    pub kind: OrderKind,
    pub requested: Vec<VarId>,
    pub weights: Vec<VarId>,
    /// Sum orders: lowest-index atom containing every weight variable.
    pub anchor: Option<usize>,
    /// Head variables of the anchor, in head order (sum orders only).
    pub anchor_vars: Vec<VarId>,
    pub sequence: Vec<VarId>,
    /// `sequence` is free of disruptive trios.
    pub trio_free: bool,
}

impl ResolvedOrder {
    pub fn new(q: &Query, order: &OrderSpec) -> ResolvedOrder {
        ResolvedOrder::with_adjacency(q, order, &Adjacency::of_query(q))
    }

    fn with_adjacency(q: &Query, order: &OrderSpec, adj: &Adjacency) -> ResolvedOrder {
        let requested = order.var_ids(q);
        let extend = |prefix: &[VarId]| match complete_order(adj, prefix) {
            Some(seq) => (seq, true),
            None => {
                let mut seq = prefix.to_vec();
                seq.extend((0..q.head_len()).filter(|v| !prefix.contains(v)));
                (seq, false)
            }
        };
        match order.kind {
            OrderKind::Lex => {
                let (sequence, trio_free) = extend(&requested);
                ResolvedOrder {
                    kind: OrderKind::Lex,
                    requested,
                    weights: Vec::new(),
                    anchor: None,
                    anchor_vars: Vec::new(),
                    sequence,
                    trio_free,
                }
            }
            OrderKind::Sum => {
                let anchor = (0..q.atoms.len()).find(|&a| {
                    let vars = q.atom_var_ids(a);
                    requested.iter().all(|w| vars.contains(w))
                });
                let anchor_vars: Vec<VarId> = match anchor {
                    Some(a) => VarSet::from_ids(q.atom_var_ids(a))
                        .intersect(VarSet::prefix(q.head_len()))
                        .iter()
                        .collect(),
                    None => Vec::new(),
                };
                let (sequence, trio_free) = extend(&anchor_vars);
                ResolvedOrder {
                    kind: OrderKind::Sum,
                    weights: requested.clone(),
                    requested,
                    anchor,
                    anchor_vars,
                    sequence,
                    trio_free,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    DirectLex,
    DirectSum,
    SingleLex,
    SingleSum,
    BaselineOnly,
}

/// Why a mode is unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    /// The atom hypergraph is not α-acyclic.
    Cyclic,
    /// Acyclic, but adding the head as an edge creates a cycle.
    NotFreeConnex,
    /// Every full extension of the lex order has a disruptive trio.
    DisruptiveTrio,
    /// No single atom contains all weight variables.
    WeightsSpanMultipleAtoms,
    /// The anchor atom's variables cannot start a trio-free order.
    AnchorOrderNotCompletable,
    /// The mode handles the other order kind.
    OrderKindMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouteVerdict {
    pub mode: Mode,
    pub supported: bool,
    pub reasons: Vec<ReasonCode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TractabilityReport {
    pub acyclic: bool,
    pub free_connex: bool,
    pub trio: Option<[String; 3]>,
    pub completed_order: Option<Vec<String>>,
    pub routing: Vec<RouteVerdict>,
    #[serde(skip)]
    pub order: ResolvedOrder,
}

impl TractabilityReport {
    pub fn verdict(&self, mode: Mode) -> &RouteVerdict {
        self.routing
            .iter()
            .find(|r| r.mode == mode)
            .expect("every mode has a verdict")
    }

    pub fn supports(&self, mode: Mode) -> bool {
        self.verdict(mode).supported
    }
}

/// Decides which algorithms apply to `(q, order)`.
pub fn analyze(q: &Query, order: &OrderSpec) -> TractabilityReport {
    let fc = check_free_connex(q);
    let adj = Adjacency::of_query(q);
    let resolved = ResolvedOrder::with_adjacency(q, order, &adj);
    let names = |ids: &[VarId]| -> Vec<String> { ids.iter().map(|&v| q.variables()[v].clone()).collect() };

    let mut structural = Vec::new();
    if !fc.acyclic {
        structural.push(ReasonCode::Cyclic);
    } else if !fc.free_connex {
        structural.push(ReasonCode::NotFreeConnex);
    }
    let verdict = |mode, reasons: Vec<ReasonCode>| RouteVerdict {
        mode,
        supported: reasons.is_empty(),
        reasons,
    };
    let mismatch = vec![ReasonCode::OrderKindMismatch];

    let (trio, completed_order, mut routing) = match resolved.kind {
        OrderKind::Lex => {
            let trio = if resolved.trio_free {
                None
            } else {
                find_disruptive_trio(&adj, &resolved.sequence)
            };
            let mut direct = structural.clone();
            if !resolved.trio_free {
                direct.push(ReasonCode::DisruptiveTrio);
            }
            (
                trio,
                resolved.trio_free.then(|| names(&resolved.sequence)),
                vec![
                    verdict(Mode::DirectLex, direct),
                    verdict(Mode::DirectSum, mismatch.clone()),
                    verdict(Mode::SingleLex, structural.clone()),
                    verdict(Mode::SingleSum, mismatch),
                ],
            )
        }
        OrderKind::Sum => {
            let mut single = structural.clone();
            if resolved.anchor.is_none() {
                single.push(ReasonCode::WeightsSpanMultipleAtoms);
            }
            let mut direct = single.clone();
            if resolved.anchor.is_some() && !resolved.trio_free {
                direct.push(ReasonCode::AnchorOrderNotCompletable);
            }
            let completed = (resolved.anchor.is_some() && resolved.trio_free).then(|| names(&resolved.sequence));
            (
                None,
                completed,
                vec![
                    verdict(Mode::DirectLex, mismatch.clone()),
                    verdict(Mode::DirectSum, direct),
                    verdict(Mode::SingleLex, mismatch),
                    verdict(Mode::SingleSum, single),
                ],
            )
        }
    };
    let any_supported = routing.iter().any(|r| r.supported);
    let mut fallback = Vec::new();
    if !any_supported {
        for r in routing.iter().flat_map(|r| r.reasons.iter()) {
            if *r != ReasonCode::OrderKindMismatch && !fallback.contains(r) {
                fallback.push(*r);
            }
        }
    }
    routing.push(RouteVerdict {
        mode: Mode::BaselineOnly,
        supported: !any_supported,
        reasons: fallback,
    });

    TractabilityReport {
        acyclic: fc.acyclic,
        free_connex: fc.free_connex,
        trio: trio.map(|(a, b, c)| {
            let n = q.variables();
            [n[a].clone(), n[b].clone(), n[c].clone()]
        }),
        completed_order,
        routing,
        order: resolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_order, parse_query};

    fn report(query: &str, order: &str) -> TractabilityReport {
        let q = parse_query(query).unwrap();
        let o = parse_order(order, &q).unwrap();
        analyze(&q, &o)
    }

    const PATH2: &str = "Q(A,B,C) :- R(A,B), S(B,C).";

    #[test]
    fn conflicting_lex_order_is_single_access_only() {
        let r = report(PATH2, "lex: A,C,B");
        assert!(!r.supports(Mode::DirectLex));
        assert_eq!(r.trio, Some(["A".into(), "C".into(), "B".into()]));
        assert_eq!(r.completed_order, None);
        assert!(r.supports(Mode::SingleLex));
        assert!(!r.supports(Mode::BaselineOnly));
    }

    #[test]
    fn join_order_is_direct() {
        let r = report(PATH2, "lex: A,B,C");
        assert!(r.supports(Mode::DirectLex));
        assert_eq!(r.completed_order, Some(vec!["A".into(), "B".into(), "C".into()]));
        assert_eq!(r.trio, None);
    }

    #[test]
    fn partial_order_completion() {
        let r = report(PATH2, "lex: A");
        assert_eq!(r.completed_order.unwrap(), ["A", "B", "C"]);
        let r = report(PATH2, "lex: A,C");
        assert!(!r.supports(Mode::DirectLex));
        assert_eq!(r.trio, Some(["A".into(), "C".into(), "B".into()]));
    }

    #[test]
    fn sum_routing() {
        let r = report(PATH2, "sum: B,C");
        assert!(r.supports(Mode::DirectSum));
        assert!(r.supports(Mode::SingleSum));
        assert_eq!(r.order.anchor, Some(1));
        assert_eq!(r.order.sequence[..2], [1, 2]);
        let r = report(PATH2, "sum: A,C");
        assert!(r.supports(Mode::BaselineOnly));
        assert_eq!(
            r.verdict(Mode::BaselineOnly).reasons,
            [ReasonCode::WeightsSpanMultipleAtoms]
        );
    }

    #[test]
    fn non_free_connex_routes_to_baseline() {
        let r = report("Q(A,C) :- R(A,B), S(B,C).", "lex: A,C");
        assert!(r.acyclic && !r.free_connex);
        assert!(!r.supports(Mode::DirectLex));
        assert!(!r.supports(Mode::SingleLex));
        assert_eq!(r.verdict(Mode::BaselineOnly).reasons, [ReasonCode::NotFreeConnex]);
    }

    #[test]
    fn triangle_is_cyclic() {
        let r = report("Q(A,B,C) :- R(A,B), S(B,C), T(A,C).", "lex: A,B,C");
        assert!(!r.acyclic);
        assert_eq!(r.verdict(Mode::DirectLex).reasons[0], ReasonCode::Cyclic);
    }

    #[test]
    fn report_json_shape() {
        let r = report(PATH2, "lex: A,C,B");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["trio"], serde_json::json!(["A", "C", "B"]));
        assert_eq!(json["routing"][0]["mode"], "DirectLex");
        assert_eq!(json["routing"][0]["reasons"][0], "disruptive_trio");
        assert!(json.get("order").is_none());
    }
}
