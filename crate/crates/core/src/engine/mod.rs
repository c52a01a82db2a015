//! Direct access: preprocessing into an index, then logarithmic access by position.

mod lex;
mod reduce;
mod sum;

pub use lex::{AccessIndex, AccessStats};
pub use reduce::{reduce, ReducedDb, WeightedRelation};
pub use sum::SumAccessIndex;

use crate::analysis::{analyze, Mode, TractabilityReport, VariableTree};
use crate::bind::{bind_atoms, head_names, AnswerTuple, Counters};
use crate::data::{validate_instance, Instance};
use crate::error::{Error, Result};
use crate::query::{OrderKind, OrderSpec, Query};

fn routed(report: &TractabilityReport, mode: Mode) -> Result<()> {
    if report.supports(mode) {
        Ok(())
    } else {
        Err(Error::NotRouted(report.verdict(mode).reasons.clone()))
    }
}

/// Builds the lex index for an order the analyzer routed to `DirectLex`.
pub fn preprocess_lex(q: &Query, db: &Instance, report: &TractabilityReport) -> Result<AccessIndex> {
    routed(report, Mode::DirectLex)?;
    let mut counters = Counters::default();
    let tables = bind_atoms(q, db)?;
    let reduced = reduce(&tables, q.head_len(), &mut counters)?;
    let tree = VariableTree::build(q, &report.order.sequence)?;
    AccessIndex::build(head_names(q), &reduced, &tree, counters)
}

/// Builds the sum index for an order the analyzer routed to `DirectSum`.
pub fn preprocess_sum(
    q: &Query,
    db: &Instance,
    order: &OrderSpec,
    report: &TractabilityReport,
) -> Result<SumAccessIndex> {
    routed(report, Mode::DirectSum)?;
    validate_instance(q, db, Some(order))?;
    let resolved = &report.order;
    let anchor = resolved.anchor.expect("routed sum order has an anchor");
    let mut counters = Counters::default();
    let tables = bind_atoms(q, db)?;
    let reduced = reduce(&tables, q.head_len(), &mut counters)?;
    let tree = VariableTree::build(q, &resolved.sequence)?;
    let lex = AccessIndex::build(head_names(q), &reduced, &tree, counters)?;
    let weight_pos = reduced.relations[anchor]
        .table
        .positions(resolved.weights.iter().copied());
    SumAccessIndex::build(lex, &reduced, anchor, &weight_pos)
}

pub fn direct_access(ix: &AccessIndex, k: u128) -> Result<AnswerTuple> {
    ix.access(k)
}

pub fn direct_access_sum(ix: &SumAccessIndex, k: u128) -> Result<AnswerTuple> {
    ix.access(k)
}

pub fn answer_count(ix: &AccessIndex) -> u128 {
    ix.count()
}

/// Either kind of index, chosen from the order.
#[derive(Debug, Clone)]
pub enum DirectIndex {
    Lex(AccessIndex),
    Sum(SumAccessIndex),
}

impl DirectIndex {
    /// Analyzes `(q, order)` and preprocesses with the matching algorithm.
    pub fn build(q: &Query, db: &Instance, order: &OrderSpec) -> Result<DirectIndex> {
        let report = analyze(q, order);
        match order.kind {
            OrderKind::Lex => preprocess_lex(q, db, &report).map(DirectIndex::Lex),
            OrderKind::Sum => preprocess_sum(q, db, order, &report).map(DirectIndex::Sum),
        }
    }

    pub fn count(&self) -> u128 {
        match self {
            DirectIndex::Lex(ix) => ix.count(),
            DirectIndex::Sum(ix) => ix.count(),
        }
    }

    pub fn access(&self, k: u128) -> Result<AnswerTuple> {
        self.access_with_stats(k).map(|(a, _)| a)
    }

    pub fn access_with_stats(&self, k: u128) -> Result<(AnswerTuple, AccessStats)> {
        match self {
            DirectIndex::Lex(ix) => ix.access_with_stats(k),
            DirectIndex::Sum(ix) => ix.access_with_stats(k),
        }
    }

    pub fn preprocess_counters(&self) -> Counters {
        match self {
            DirectIndex::Lex(ix) => ix.preprocess,
            DirectIndex::Sum(ix) => ix.preprocess,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Relation;
    use crate::query::{parse_order, parse_query};
    use crate::value::Value;

    fn db1() -> Instance {
        Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 1], &[1, 2], &[2, 1]]))
            .with(Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[2, 20], &[2, 30]]))
    }

    fn ints(t: &AnswerTuple) -> Vec<i64> {
        t.values.iter().map(|v| v.as_int().unwrap()).collect()
    }

    fn lex_index(query: &str, order: &str, db: &Instance) -> AccessIndex {
        let q = parse_query(query).unwrap();
        let o = parse_order(order, &q).unwrap();
        preprocess_lex(&q, db, &analyze(&q, &o)).unwrap()
    }

    #[test]
    fn two_path_examples() {
        let ix = lex_index("Q(A,B,C) :- R(A,B), S(B,C).", "lex: A,B,C", &db1());
        assert_eq!(answer_count(&ix), 4);
        assert_eq!(ints(&direct_access(&ix, 0).unwrap()), [1, 1, 10]);
        assert_eq!(ints(&direct_access(&ix, 2).unwrap()), [1, 2, 30]);
        assert!(matches!(
            direct_access(&ix, 4),
            Err(Error::OutOfRange { k: 4, count: 4 })
        ));
    }

    #[test]
    fn empty_join_is_a_valid_index() {
        let db = db1().with(Relation::from_ints("S", &["B", "C"], &[]));
        let ix = lex_index("Q(A,B,C) :- R(A,B), S(B,C).", "lex: A,B,C", &db);
        assert_eq!(ix.count(), 0);
        assert!(matches!(ix.access(0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn projection_counts_extensions() {
        let db = db1().with(Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[2, 20]]));
        let ix = lex_index("Q(A,B) :- R(A,B), S(B,C).", "lex: A,B", &db);
        assert_eq!(ix.count(), 3);
    }

    #[test]
    fn cartesian_product_count() {
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A"], &[&[1], &[2], &[3]]))
            .with(Relation::from_ints("S", &["B"], &[&[1], &[2], &[3], &[4], &[5]]));
        let ix = lex_index("Q(A,B) :- R(A), S(B).", "lex: B,A", &db);
        assert_eq!(ix.count(), 15);
        assert_eq!(ints(&ix.access(0).unwrap()), [1, 1]);
        assert_eq!(ints(&ix.access(1).unwrap()), [2, 1]);
        assert_eq!(ints(&ix.access(14).unwrap()), [3, 5]);
    }

    #[test]
    fn not_routed_for_trio_order() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
        let o = parse_order("lex: A,C,B", &q).unwrap();
        assert!(matches!(
            preprocess_lex(&q, &db1(), &analyze(&q, &o)),
            Err(Error::NotRouted(_))
        ));
    }

    #[test]
    fn single_atom_sum() {
        let q = parse_query("Q(A,B) :- R(A,B).").unwrap();
        let db = Instance::new().with(Relation::from_ints("R", &["A", "B"], &[&[1, 5], &[2, 2], &[3, 1]]));
        let o = parse_order("sum: A,B", &q).unwrap();
        let ix = preprocess_sum(&q, &db, &o, &analyze(&q, &o)).unwrap();
        assert_eq!(ix.block_weights().map(|(w, _)| w).collect::<Vec<_>>(), [4, 4, 6]);
        assert_eq!(ints(&direct_access_sum(&ix, 0).unwrap()), [2, 2]);
        assert_eq!(ints(&direct_access_sum(&ix, 1).unwrap()), [3, 1]);
        assert_eq!(ints(&direct_access_sum(&ix, 2).unwrap()), [1, 5]);
        assert!(matches!(ix.access(3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn two_path_sum_uses_second_atom() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 1], &[2, 2]]))
            .with(Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[2, 5]]));
        let o = parse_order("sum: B,C", &q).unwrap();
        let ix = preprocess_sum(&q, &db, &o, &analyze(&q, &o)).unwrap();
        assert_eq!(ix.block_weights().collect::<Vec<_>>(), [(7, 1), (11, 1)]);
        assert_eq!(ints(&ix.access(0).unwrap()), [2, 2, 5]);
        let bad = parse_order("sum: A,C", &q).unwrap();
        assert!(matches!(
            preprocess_sum(&q, &db, &bad, &analyze(&q, &bad)),
            Err(Error::NotRouted(_))
        ));
    }

    #[test]
    fn string_values_and_boolean_query() {
        let q = parse_query("Q(A) :- R(A,B).").unwrap();
        let db = Instance::new().with(
            Relation::new(
                "R",
                vec!["A".into(), "B".into()],
                vec![
                    vec![Value::str("b"), Value::Int(1)],
                    vec![Value::Int(9), Value::Int(1)],
                    vec![Value::str("a"), Value::Int(2)],
                ],
            )
            .unwrap(),
        );
        let ix = DirectIndex::build(&q, &db, &parse_order("lex: A", &q).unwrap()).unwrap();
        let firsts: Vec<Value> = (0..3).map(|k| ix.access(k).unwrap().values[0].clone()).collect();
        assert_eq!(firsts, [Value::Int(9), Value::str("a"), Value::str("b")]);

        let qb = parse_query("Q() :- R(A,B).").unwrap();
        let tables = bind_atoms(&qb, &db).unwrap();
        let reduced = reduce(&tables, 0, &mut Counters::default()).unwrap();
        let tree = VariableTree::build(&qb, &[]).unwrap();
        let ix = AccessIndex::build(head_names(&qb), &reduced, &tree, Counters::default()).unwrap();
        assert_eq!(ix.count(), 3);
        assert!(ix.access(2).unwrap().values.is_empty());
    }
}
