//! Test helpers: seeded instances and oracles written without the library's
//! join or ranking code.

#![allow(dead_code)]

use std::cmp::Ordering;

use cqda::{Instance, OrderKind, OrderSpec, Query, Relation, ResolvedOrder, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random relation for every atom of `q` (self-joins share one relation).
/// With `strings`, some cells are short strings instead of integers.
pub fn random_instance(q: &Query, rng: &mut ChaCha8Rng, max_rows: usize, domain: i64, strings: bool) -> Instance {
    let mut db = Instance::new();
    for atom in &q.atoms {
        if db.get(&atom.relation).is_some() {
            continue;
        }
        let arity = atom.vars.len();
        let rows = rng.gen_range(0..=max_rows);
        let data = (0..rows)
            .map(|_| {
                (0..arity)
                    .map(|_| {
                        if strings && rng.gen_bool(0.2) {
                            Value::str(["x", "y", "z"][rng.gen_range(0..3)])
                        } else {
                            Value::Int(rng.gen_range(1..=domain))
                        }
                    })
                    .collect()
            })
            .collect();
        let cols = (0..arity).map(|i| format!("c{i}")).collect();
        db.insert(Relation::new(atom.relation.clone(), cols, data).unwrap());
    }
    db
}

/// Every answer (one per satisfying assignment of all variables, projected
/// onto the head) by plain backtracking over the atoms' rows.
pub fn brute_force_answers(q: &Query, db: &Instance) -> Vec<Vec<Value>> {
    let nvars = q.variables().len();
    let atoms: Vec<(Vec<usize>, &Relation)> = q
        .atoms
        .iter()
        .map(|a| {
            let ids = a.vars.iter().map(|v| q.var_id(v).unwrap()).collect();
            (ids, db.get(&a.relation).unwrap())
        })
        .collect();
    let mut out = Vec::new();
    let mut assignment: Vec<Option<Value>> = vec![None; nvars];
    fn go(
        i: usize,
        atoms: &[(Vec<usize>, &Relation)],
        assignment: &mut Vec<Option<Value>>,
        head: usize,
        out: &mut Vec<Vec<Value>>,
    ) {
        if i == atoms.len() {
            out.push(assignment[..head].iter().map(|v| v.clone().unwrap()).collect());
            return;
        }
        let (ids, rel) = &atoms[i];
        for row in &rel.rows {
            let saved = assignment.clone();
            let mut ok = true;
            for (&v, value) in ids.iter().zip(row) {
                match &assignment[v] {
                    Some(x) if x != value => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => assignment[v] = Some(value.clone()),
                }
            }
            if ok {
                go(i + 1, atoms, assignment, head, out);
            }
            *assignment = saved;
        }
    }
    go(0, &atoms, &mut assignment, q.head_len(), &mut out);
    out
}

/// Compares two answers under the resolved order (weight sum first for sum orders).
pub fn compare(order: &ResolvedOrder, a: &[Value], b: &[Value]) -> Ordering {
    if order.kind == OrderKind::Sum {
        let w = |t: &[Value]| -> i128 { order.weights.iter().map(|&v| t[v].as_int().unwrap() as i128).sum() };
        let c = w(a).cmp(&w(b));
        if c.is_ne() {
            return c;
        }
    }
    for &v in &order.sequence {
        let c = a[v].cmp(&b[v]);
        if c.is_ne() {
            return c;
        }
    }
    Ordering::Equal
}

pub fn sorted_answers(q: &Query, db: &Instance, o: &OrderSpec) -> Vec<Vec<Value>> {
    let resolved = ResolvedOrder::new(q, o);
    let mut all = brute_force_answers(q, db);
    all.sort_by(|a, b| compare(&resolved, a, b));
    all
}

/// Random lex order: a prefix (at least one variable) of a random permutation of the head.
pub fn random_lex_order(q: &Query, rng: &mut ChaCha8Rng) -> OrderSpec {
    let mut vars = q.head.clone();
    vars.shuffle(rng);
    let len = rng.gen_range(1..=vars.len());
    OrderSpec::lex(&vars[..len])
}

/// Random sum order over a nonempty subset of one atom's head variables.
pub fn random_sum_order(q: &Query, rng: &mut ChaCha8Rng) -> Option<OrderSpec> {
    let atom = &q.atoms[rng.gen_range(0..q.atoms.len())];
    let mut vars: Vec<String> = atom.vars.iter().filter(|v| q.head.contains(v)).cloned().collect();
    vars.sort();
    vars.dedup();
    if vars.is_empty() {
        return None;
    }
    vars.shuffle(rng);
    let len = rng.gen_range(1..=vars.len());
    Some(OrderSpec::sum(&vars[..len]))
}

/// Does `order` (a permutation of head ids) contain a disruptive trio under
/// `adjacent`? Scans all triples.
pub fn has_trio(order: &[usize], adjacent: &dyn Fn(usize, usize) -> bool) -> bool {
    let n = order.len();
    for l in 0..n {
        for i in 0..l {
            for j in i + 1..l {
                let (x1, x2, x3) = (order[i], order[j], order[l]);
                if adjacent(x1, x3) && adjacent(x2, x3) && !adjacent(x1, x2) {
                    return true;
                }
            }
        }
    }
    false
}

/// All permutations of `items`.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// The three shapes of the synthetic experiments.
pub const SHAPES: [&str; 3] = [
    "Q(A,B,C) :- R(A,B), S(B,C).",
    "Q(A,B,C,D) :- R(A,B), S(B,C), T(C,D).",
    "Q(A,B,C,D) :- R(A,B), S(A,C), T(A,D).",
];

/// A wider mix, including projections, self-joins, repeated variables and
/// Cartesian products.
pub const QUERIES: [&str; 14] = [
    "Q(A,B,C) :- R(A,B), S(B,C).",
    "Q(A,B,C,D) :- R(A,B), S(B,C), T(C,D).",
    "Q(A,B,C,D) :- R(A,B), S(A,C), T(A,D).",
    "Q(A,B) :- R(A,B), S(B,C).",
    "Q(B,C) :- R(A,B), S(B,C), T(C,D).",
    "Q(A) :- R(A,B), S(B,C).",
    "Q(C,A,B) :- R(A,B), S(B,C).",
    "Q(A,B) :- R(A,B), S(A,B).",
    "Q(A,B,C) :- R(A,B), R(B,C).",
    "Q(A,B) :- R(A,B,A), S(B).",
    "Q(A,B) :- R(A), S(B).",
    "Q(A,B,C) :- R(A,B,C), S(C,D), T(D,E).",
    "Q(A,C) :- R(A,B), S(B,C).",
    "Q(A,B,C) :- R(A,B), S(B,C), T(A,C).",
];
