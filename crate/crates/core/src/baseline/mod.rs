//! Reference strategies: materialize-and-sort (the correctness oracle), a
//! bounded-heap top-k with a switch to full sorting, and sort-before-join for
//! single-attribute orders on path joins. Also emits SQL for both encodings.

mod eval;
mod sql;

use std::collections::BinaryHeap;

use serde::Serialize;

pub use sql::{emit_sql, SqlDialect};

use crate::analysis::ResolvedOrder;
use crate::bind::{bind_atoms, head_names, AnswerTuple, KeyMap, Table};
use crate::data::{validate_instance, Instance};
use crate::error::{Error, Result};
use crate::query::{OrderKind, OrderSpec, Query, VarId};
use crate::value::Value;

/// Largest join result the baselines will produce by default.
pub const DEFAULT_RESULT_CAP: u64 = 100_000_000;

/// Total-order key of an answer: optional weight sum, then the tie-break sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankKey {
    weight: Option<i128>,
    seq: Vec<Value>,
}

impl RankKey {
    pub fn new(order: &ResolvedOrder, head_values: &[Value]) -> RankKey {
        let weight = match order.kind {
            OrderKind::Lex => None,
            OrderKind::Sum => Some(
                order
                    .weights
                    .iter()
                    .map(|&w| head_values[w].as_int().map_or(0, i128::from))
                    .sum(),
            ),
        };
        RankKey {
            weight,
            seq: order.sequence.iter().map(|&v| head_values[v].clone()).collect(),
        }
    }

    fn into_values(self, order: &ResolvedOrder) -> Vec<Value> {
        let mut values = vec![Value::Int(0); self.seq.len()];
        for (v, &var) in self.seq.into_iter().zip(&order.sequence) {
            values[var] = v;
        }
        values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    FullSort,
    TopkHeap,
    SortBeforeJoin,
}

/// Which strategy ran, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyLog {
    pub requested: StrategyKind,
    pub ran: StrategyKind,
    pub switched_to_full_sort: bool,
    /// Answers produced by the join pipeline before stopping.
    pub emitted: u64,
    pub answer_count: Option<u128>,
    pub reason: String,
}

/// Per-call baseline configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineConfig {
    pub result_cap: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            result_cap: DEFAULT_RESULT_CAP,
        }
    }
}

fn prepare(q: &Query, db: &Instance, order: &OrderSpec) -> Result<(Vec<Table>, ResolvedOrder)> {
    order.validate(q)?;
    validate_instance(q, db, Some(order))?;
    Ok((bind_atoms(q, db)?, ResolvedOrder::new(q, order)))
}

fn sorted_keys(q: &Query, tables: &[Table], order: &ResolvedOrder, cap: u64) -> Result<Vec<RankKey>> {
    let mut keys = Vec::new();
    eval::for_each_answer(q, tables, cap, |a| keys.push(RankKey::new(order, a)))?;
    keys.sort_unstable();
    Ok(keys)
}

/// Every answer (with duplicates), sorted by the order and its tie-break.
pub fn materialize_and_sort(q: &Query, db: &Instance, order: &OrderSpec) -> Result<Vec<AnswerTuple>> {
    materialize_and_sort_with(q, db, order, BaselineConfig::default())
}

pub fn materialize_and_sort_with(
    q: &Query,
    db: &Instance,
    order: &OrderSpec,
    config: BaselineConfig,
) -> Result<Vec<AnswerTuple>> {
    let (tables, resolved) = prepare(q, db, order)?;
    let head = head_names(q);
    Ok(sorted_keys(q, &tables, &resolved, config.result_cap)?
        .into_iter()
        .map(|k| AnswerTuple::new(head.clone(), k.into_values(&resolved)))
        .collect())
}

/// Answer count by streaming the join once.
pub fn count_answers(q: &Query, db: &Instance, config: BaselineConfig) -> Result<u128> {
    validate_instance(q, db, None)?;
    let tables = bind_atoms(q, db)?;
    eval::for_each_answer(q, &tables, config.result_cap, |_| {}).map(u128::from)
}

/// The k-th answer via a bounded max-heap of the k+1 smallest answers,
/// switching to a full sort when `k >= |J| / 2`. `|J|` is exact, taken from
/// a counting pre-pass.
pub fn topk_heap_access(q: &Query, db: &Instance, order: &OrderSpec, k: u128) -> Result<(AnswerTuple, StrategyLog)> {
    topk_heap_access_with(q, db, order, k, BaselineConfig::default())
}

pub fn topk_heap_access_with(
    q: &Query,
    db: &Instance,
    order: &OrderSpec,
    k: u128,
    config: BaselineConfig,
) -> Result<(AnswerTuple, StrategyLog)> {
    let (tables, resolved) = prepare(q, db, order)?;
    let count = u128::from(eval::for_each_answer(q, &tables, config.result_cap, |_| {})?);
    if k >= count {
        return Err(Error::OutOfRange { k, count });
    }
    let head = head_names(q);
    if 2 * k >= count {
        let mut keys = sorted_keys(q, &tables, &resolved, config.result_cap)?;
        let key = keys.swap_remove(k as usize);
        let log = StrategyLog {
            requested: StrategyKind::TopkHeap,
            ran: StrategyKind::FullSort,
            switched_to_full_sort: true,
            emitted: count as u64,
            answer_count: Some(count),
            reason: format!("k = {k} >= |J|/2 = {count}/2"),
        };
        return Ok((AnswerTuple::new(head, key.into_values(&resolved)), log));
    }
    let bound = k as usize + 1;
    let mut heap: BinaryHeap<RankKey> = BinaryHeap::with_capacity(bound + 1);
    eval::for_each_answer(q, &tables, config.result_cap, |a| {
        let key = RankKey::new(&resolved, a);
        if heap.len() < bound {
            heap.push(key);
        } else if heap.peek().is_some_and(|top| key < *top) {
            heap.pop();
            heap.push(key);
        }
    })?;
    let key = heap.pop().expect("heap holds k+1 answers");
    let log = StrategyLog {
        requested: StrategyKind::TopkHeap,
        ran: StrategyKind::TopkHeap,
        switched_to_full_sort: false,
        emitted: count as u64,
        answer_count: Some(count),
        reason: format!("k = {k} < |J|/2 = {count}/2"),
    };
    Ok((AnswerTuple::new(head, key.into_values(&resolved)), log))
}

/// Path shape `R1(v0,v1), R2(v1,v2), ..., Rm(v(m-1),vm)` over distinct
/// variables, in atom order. Returns the variable chain.
fn path_chain(q: &Query, tables: &[Table]) -> Option<Vec<VarId>> {
    let mut chain = Vec::new();
    for (i, atom) in q.atoms.iter().enumerate() {
        if atom.vars.len() != 2 || tables[i].arity() != 2 {
            return None;
        }
        let ids = q.atom_var_ids(i);
        if i == 0 {
            chain.push(ids[0]);
        } else if *chain.last()? != ids[0] {
            return None;
        }
        chain.push(ids[1]);
    }
    let mut seen = chain.clone();
    seen.sort_unstable();
    seen.dedup();
    (seen.len() == chain.len()).then_some(chain)
}

/// Single-attribute lex order on a path join: sort the atoms holding the
/// attribute, merge them in attribute order, extend each merged pair through
/// index nested loops over the remaining atoms, and stop once the block of
/// equal attribute values containing position `k` is complete. Only that
/// block is re-ranked by the tie-break.
pub fn sort_before_join_access(
    q: &Query,
    db: &Instance,
    order: &OrderSpec,
    k: u128,
) -> Result<(AnswerTuple, StrategyLog)> {
    if order.kind != OrderKind::Lex || order.vars.len() != 1 {
        return Err(Error::NotApplicable(
            "sort-before-join needs a single-attribute lex order".into(),
        ));
    }
    let (tables, resolved) = prepare(q, db, order)?;
    if !q.is_full() {
        return Err(Error::NotApplicable("sort-before-join needs a full query".into()));
    }
    let chain = path_chain(q, &tables).ok_or_else(|| Error::NotApplicable("query is not a path join".into()))?;
    let b = resolved.requested[0];
    let j = chain
        .iter()
        .position(|&v| v == b)
        .expect("order variable is in the path");
    let m = tables.len();

    // Atoms holding b: left = atom j-1 (b on its right), right = atom j.
    let sorted_by = |atom: usize, col: usize| -> Vec<u32> {
        let t = &tables[atom];
        let mut ids: Vec<u32> = (0..t.len() as u32).collect();
        ids.sort_by(|&x, &y| t.row(x as usize)[col].cmp(&t.row(y as usize)[col]));
        ids
    };
    let left = (j > 0).then(|| sorted_by(j - 1, 1));
    let right = (j < m).then(|| sorted_by(j, 0));

    // Nested-loop indexes for the remaining atoms, keyed by the variable
    // nearer to b.
    let index_on = |atom: usize, col: usize| -> KeyMap<Vec<u32>> {
        let mut idx: KeyMap<Vec<u32>> = KeyMap::default();
        for (i, row) in tables[atom].rows().enumerate() {
            idx.entry(vec![row[col].clone()]).or_default().push(i as u32);
        }
        idx
    };
    let left_index: Vec<KeyMap<Vec<u32>>> = (0..j.saturating_sub(1)).map(|a| index_on(a, 1)).collect();
    let right_index: Vec<KeyMap<Vec<u32>>> = (j + 1..m).map(|a| index_on(a, 0)).collect();

    let head = head_names(q);
    let mut emitted = 0u64;
    let mut before = 0u128;
    let mut block: Vec<RankKey> = Vec::new();
    let mut assignment = vec![Value::Int(0); chain.len()];

    // Iterate b-groups in ascending order by merging the sorted atoms.
    let groups = merge_groups(&tables, j, m, left.as_deref(), right.as_deref());
    for (lefts, rights) in groups {
        block.clear();
        let lefts = lefts.unwrap_or_else(|| vec![u32::MAX]);
        let rights = rights.unwrap_or_else(|| vec![u32::MAX]);
        for &l in &lefts {
            if l != u32::MAX {
                let row = tables[j - 1].row(l as usize);
                assignment[chain[j - 1]] = row[0].clone();
                assignment[chain[j]] = row[1].clone();
            }
            for &r in &rights {
                if r != u32::MAX {
                    let row = tables[j].row(r as usize);
                    assignment[chain[j]] = row[0].clone();
                    assignment[chain[j + 1]] = row[1].clone();
                }
                extend_left(
                    &tables,
                    &left_index,
                    &chain,
                    j.saturating_sub(1),
                    &mut assignment,
                    &mut |a| {
                        extend_right(&tables, &right_index, &chain, j + 1, m, a, &mut |full| {
                            emitted += 1;
                            block.push(RankKey::new(&resolved, full));
                        });
                    },
                );
            }
        }
        let size = block.len() as u128;
        if before + size > k {
            block.sort_unstable();
            let key = block.swap_remove((k - before) as usize);
            let log = StrategyLog {
                requested: StrategyKind::SortBeforeJoin,
                ran: StrategyKind::SortBeforeJoin,
                switched_to_full_sort: false,
                emitted,
                answer_count: None,
                reason: format!("stopped after the block of {} = {}", q.variables()[b], key.seq[0]),
            };
            return Ok((AnswerTuple::new(head, key.into_values(&resolved)), log));
        }
        before += size;
    }
    Err(Error::OutOfRange { k, count: before })
}

type RowGroup = Option<Vec<u32>>;

/// Pairs of row groups with equal b, ascending in b. A side is `None` when no
/// atom lies on it.
fn merge_groups(
    tables: &[Table],
    j: usize,
    m: usize,
    left: Option<&[u32]>,
    right: Option<&[u32]>,
) -> Vec<(RowGroup, RowGroup)> {
    let runs = |atom: usize, col: usize, ids: &[u32]| -> Vec<(Value, Vec<u32>)> {
        let mut out: Vec<(Value, Vec<u32>)> = Vec::new();
        for &i in ids {
            let v = &tables[atom].row(i as usize)[col];
            match out.last_mut() {
                Some((last, g)) if last == v => g.push(i),
                _ => out.push((v.clone(), vec![i])),
            }
        }
        out
    };
    match (left, right) {
        (Some(l), Some(r)) => {
            let (lr, rr) = (runs(j - 1, 1, l), runs(j, 0, r));
            let mut out = Vec::new();
            let (mut a, mut b) = (0, 0);
            while a < lr.len() && b < rr.len() {
                match lr[a].0.cmp(&rr[b].0) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        out.push((Some(lr[a].1.clone()), Some(rr[b].1.clone())));
                        a += 1;
                        b += 1;
                    }
                }
            }
            out
        }
        (Some(l), None) => runs(j - 1, 1, l).into_iter().map(|(_, g)| (Some(g), None)).collect(),
        (None, Some(r)) => {
            debug_assert!(j < m);
            runs(j, 0, r).into_iter().map(|(_, g)| (None, Some(g))).collect()
        }
        (None, None) => Vec::new(),
    }
}

/// Extends through atoms `upto-1, ..., 0` (each keyed by its right variable).
fn extend_left(
    tables: &[Table],
    index: &[KeyMap<Vec<u32>>],
    chain: &[VarId],
    upto: usize,
    assignment: &mut Vec<Value>,
    emit: &mut dyn FnMut(&mut Vec<Value>),
) {
    if upto == 0 {
        emit(assignment);
        return;
    }
    let atom = upto - 1;
    let key = [assignment[chain[atom + 1]].clone()];
    if let Some(ids) = index[atom].get(&key[..]) {
        for &i in ids {
            assignment[chain[atom]] = tables[atom].row(i as usize)[0].clone();
            extend_left(tables, index, chain, atom, assignment, emit);
        }
    }
}

/// Extends through atoms `from, ..., m-1` (each keyed by its left variable).
fn extend_right(
    tables: &[Table],
    index: &[KeyMap<Vec<u32>>],
    chain: &[VarId],
    from: usize,
    m: usize,
    assignment: &mut Vec<Value>,
    emit: &mut dyn FnMut(&[Value]),
) {
    if from >= m {
        emit(assignment);
        return;
    }
    let first = m - index.len();
    let key = [assignment[chain[from]].clone()];
    if let Some(ids) = index[from - first].get(&key[..]) {
        for &i in ids {
            assignment[chain[from + 1]] = tables[from].row(i as usize)[1].clone();
            extend_right(tables, index, chain, from + 1, m, assignment, emit);
        }
    }
}
