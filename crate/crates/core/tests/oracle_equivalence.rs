mod common;

use common::*;
use cqda::baseline::{materialize_and_sort, sort_before_join_access, topk_heap_access};
use cqda::{analyze, parse_query, select_lex, select_sum, DirectIndex, Error, Mode, OrderKind, OrderSpec, Value};
use proptest::prelude::*;

fn values(a: &cqda::AnswerTuple) -> Vec<Value> {
    a.values.clone()
}

fn check_all(query: &str, seed: u64, sum: bool) -> Result<(), TestCaseError> {
    let q = parse_query(query).unwrap();
    let mut r = rng(seed);
    let db = random_instance(&q, &mut r, 7, 4, !sum);
    let order = if sum {
        match random_sum_order(&q, &mut r) {
            Some(o) => o,
            None => return Ok(()),
        }
    } else {
        random_lex_order(&q, &mut r)
    };
    let expected = sorted_answers(&q, &db, &order);
    let n = expected.len() as u128;
    let report = analyze(&q, &order);

    let sorted = materialize_and_sort(&q, &db, &order).unwrap();
    prop_assert_eq!(sorted.iter().map(values).collect::<Vec<_>>(), expected.clone());

    let direct_mode = if sum { Mode::DirectSum } else { Mode::DirectLex };
    let single_mode = if sum { Mode::SingleSum } else { Mode::SingleLex };
    let ix = DirectIndex::build(&q, &db, &order);
    if report.supports(direct_mode) {
        let ix = ix.unwrap();
        prop_assert_eq!(ix.count(), n);
        for (k, want) in expected.iter().enumerate() {
            prop_assert_eq!(&ix.access(k as u128).unwrap().values, want, "direct k={}", k);
        }
        let past_end = matches!(ix.access(n), Err(Error::OutOfRange { .. }));
        prop_assert!(past_end);
    } else {
        let refused = matches!(ix, Err(Error::NotRouted(_)));
        prop_assert!(refused);
    }

    for k in 0..=n {
        let got = if sum {
            select_sum(&q, &db, &order, k, seed)
        } else {
            select_lex(&q, &db, &order, k, seed)
        };
        if !report.supports(single_mode) {
            let refused = matches!(got, Err(Error::NotRouted(_)));
            prop_assert!(refused);
            break;
        }
        match expected.get(k as usize) {
            Some(want) => prop_assert_eq!(&got.unwrap().values, want, "select k={}", k),
            None => {
                let past_end = matches!(got, Err(Error::OutOfRange { .. }) | Err(Error::KOutOfRange { .. }));
                prop_assert!(past_end)
            }
        }
    }

    for k in 0..=n {
        let got = topk_heap_access(&q, &db, &order, k);
        match expected.get(k as usize) {
            Some(want) => {
                let (a, log) = got.unwrap();
                prop_assert_eq!(&a.values, want, "topk k={}", k);
                prop_assert_eq!(log.switched_to_full_sort, 2 * k >= n);
            }
            None => {
                let past_end = matches!(got, Err(Error::OutOfRange { .. }));
                prop_assert!(past_end)
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn lex_orders_match_the_oracle(qi in 0..QUERIES.len(), seed in any::<u64>()) {
        check_all(QUERIES[qi], seed, false)?;
    }

    #[test]
    fn sum_orders_match_the_oracle(qi in 0..QUERIES.len(), seed in any::<u64>()) {
        check_all(QUERIES[qi], seed, true)?;
    }

    #[test]
    fn sort_before_join_matches_the_oracle(path in 0..2usize, var in 0..4usize, seed in any::<u64>()) {
        let q = parse_query(SHAPES[path]).unwrap();
        let var = &q.head[var % q.head.len()];
        let order = OrderSpec::lex(&[var]);
        let mut r = rng(seed);
        let db = random_instance(&q, &mut r, 8, 3, true);
        let expected = sorted_answers(&q, &db, &order);
        for (k, want) in expected.iter().enumerate() {
            let (a, log) = sort_before_join_access(&q, &db, &order, k as u128).unwrap();
            prop_assert_eq!(&a.values, want);
            prop_assert!(log.emitted as usize <= expected.len());
        }
        let n = expected.len() as u128;
        let past_end = matches!(sort_before_join_access(&q, &db, &order, n), Err(Error::OutOfRange { .. }));
        prop_assert!(past_end);
    }

    /// Positions are a bijection onto the answer bag and never decrease in rank.
    #[test]
    fn direct_access_is_sorted_and_bijective(qi in 0..7usize, seed in any::<u64>()) {
        let q = parse_query(QUERIES[qi]).unwrap();
        let mut r = rng(seed);
        let db = random_instance(&q, &mut r, 10, 5, false);
        let order = random_lex_order(&q, &mut r);
        let Ok(ix) = DirectIndex::build(&q, &db, &order) else { return Ok(()) };
        let resolved = cqda::ResolvedOrder::new(&q, &order);
        let got: Vec<Vec<Value>> = (0..ix.count()).map(|k| ix.access(k).unwrap().values).collect();
        for w in got.windows(2) {
            prop_assert!(compare(&resolved, &w[0], &w[1]).is_le());
        }
        let mut a = got.clone();
        let mut b = brute_force_answers(&q, &db);
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn non_free_connex_projection_is_not_routed() {
    let q = parse_query("Q(A,C) :- R(A,B), S(B,C).").unwrap();
    let db = random_instance(&q, &mut rng(3), 6, 3, false);
    let o = OrderSpec::lex(&["A", "C"]);
    assert!(matches!(DirectIndex::build(&q, &db, &o), Err(Error::NotRouted(_))));
    assert!(matches!(select_lex(&q, &db, &o, 0, 0), Err(Error::NotRouted(_))));
    let expected = sorted_answers(&q, &db, &o);
    let sorted = materialize_and_sort(&q, &db, &o).unwrap();
    assert_eq!(sorted.iter().map(values).collect::<Vec<_>>(), expected);
}

#[test]
fn trio_order_is_single_access_only() {
    let q = parse_query(SHAPES[0]).unwrap();
    let o = OrderSpec::lex(&["A", "C", "B"]);
    assert_eq!(o.kind, OrderKind::Lex);
    for seed in 0..20 {
        let db = random_instance(&q, &mut rng(seed), 8, 3, true);
        assert!(matches!(DirectIndex::build(&q, &db, &o), Err(Error::NotRouted(_))));
        let expected = sorted_answers(&q, &db, &o);
        for (k, want) in expected.iter().enumerate() {
            assert_eq!(&select_lex(&q, &db, &o, k as u128, seed).unwrap().values, want);
        }
    }
}

#[test]
fn empty_instance_has_no_answers() {
    let q = parse_query(SHAPES[1]).unwrap();
    let mut db = random_instance(&q, &mut rng(1), 5, 3, false);
    let s = db.get("S").unwrap().clone();
    db.insert(cqda::Relation::new("S", s.columns, Vec::new()).unwrap());
    let o = OrderSpec::lex(&["A", "B", "C", "D"]);
    let ix = DirectIndex::build(&q, &db, &o).unwrap();
    assert_eq!(ix.count(), 0);
    assert!(matches!(ix.access(0), Err(Error::OutOfRange { k: 0, count: 0 })));
    assert!(matches!(select_lex(&q, &db, &o, 0, 0), Err(Error::OutOfRange { .. })));
}
