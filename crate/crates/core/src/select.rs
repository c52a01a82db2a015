//! Single access: the k-th answer computed from scratch by counting and
//! weighted quickselect, one variable at a time. Nothing on this path sorts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::analysis::{analyze, gyo_join_tree, Hypergraph, JoinTree, Mode, ReasonCode, TractabilityReport};
use crate::bind::{bind_atoms, head_names, project_into, AnswerTuple, Counters, KeyMap, Table};
use crate::data::{validate_instance, Instance};
use crate::error::{checked_add, checked_mul, Error, Result};
use crate::query::{OrderSpec, Query, VarId};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedItem<K> {
    pub value: K,
    pub weight: u128,
}

impl<K> WeightedItem<K> {
    pub fn new(value: K, weight: u128) -> Self {
        WeightedItem { value, weight }
    }
}

/// Finds the value whose block contains rank `k` when items are laid out in
/// ascending value order, each occupying `weight` consecutive ranks. Returns
/// the value and the offset of `k` inside its block. Equal values share one
/// block. Expected linear time; the items are reordered in place.
pub fn weighted_select<K: Ord + Clone, R: Rng>(
    items: &mut [WeightedItem<K>],
    k: u128,
    rng: &mut R,
) -> Result<(K, u128)> {
    let total = items.iter().try_fold(0u128, |a, i| checked_add(a, i.weight))?;
    if k >= total {
        return Err(Error::KOutOfRange { k, total });
    }
    let mut k = k;
    let (mut lo, mut hi) = (0, items.len());
    loop {
        let pivot = items[rng.gen_range(lo..hi)].value.clone();
        // Three-way partition of lo..hi: [< pivot | == pivot | > pivot].
        let (mut lt, mut i, mut gt) = (lo, lo, hi);
        let (mut below, mut equal) = (0u128, 0u128);
        while i < gt {
            match items[i].value.cmp(&pivot) {
                std::cmp::Ordering::Less => {
                    below += items[i].weight;
                    items.swap(lt, i);
                    lt += 1;
                    i += 1;
                }
                std::cmp::Ordering::Equal => {
                    equal += items[i].weight;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    gt -= 1;
                    items.swap(i, gt);
                }
            }
        }
        if k < below {
            hi = lt;
        } else if k < below + equal {
            return Ok((pivot, k - below));
        } else {
            k -= below + equal;
            lo = gt;
        }
    }
}

/// Atoms bound to data plus the values fixed so far. Every counting round
/// starts again from the original atoms: filter by the fixed values, fully
/// semi-join reduce, then count bottom-up.
struct Selector {
    base: Vec<Table>,
    tree: JoinTree,
    fixed: Vec<(VarId, Value)>,
    counters: Counters,
}

impl Selector {
    fn new(q: &Query, db: &Instance) -> Result<Selector> {
        let tree = gyo_join_tree(&Hypergraph::of_query(q))
            .tree()
            .ok_or_else(|| Error::NotRouted(vec![ReasonCode::Cyclic]))?;
        Ok(Selector {
            base: bind_atoms(q, db)?,
            tree,
            fixed: Vec::new(),
            counters: Counters::default(),
        })
    }

    fn fix(&mut self, var: VarId, value: &Value) {
        self.fixed.push((var, value.clone()));
    }

    /// The original atoms restricted to the fixed values, fully reduced.
    fn filtered(&mut self) -> Vec<Table> {
        let mut tables: Vec<Table> = Vec::with_capacity(self.base.len());
        for t in &self.base {
            self.counters.rows += t.len() as u64;
            let conds: Vec<(usize, &Value)> = self
                .fixed
                .iter()
                .filter_map(|(v, value)| t.position(*v).map(|p| (p, value)))
                .collect();
            let mut out = Table::new(t.vars.clone());
            for row in t.rows() {
                if conds.iter().all(|&(p, v)| row[p] == *v) {
                    out.push(row);
                }
            }
            tables.push(out);
        }
        let (parent, preorder) = self.tree.rooted_at(0);
        for &u in preorder.iter().rev() {
            if let Some(p) = parent[u] {
                self.semi_join(&mut tables, p, u);
            }
        }
        for &u in &preorder {
            if let Some(p) = parent[u] {
                self.semi_join(&mut tables, u, p);
            }
        }
        tables
    }

    /// Keeps the rows of `target` that agree with some row of `source`.
    fn semi_join(&mut self, tables: &mut [Table], target: usize, source: usize) {
        let sep = self.tree.edges[target].intersect(self.tree.edges[source]);
        let src = &tables[source];
        let src_pos = src.positions(sep.iter());
        let mut keys: FxHashSet<Vec<Value>> = FxHashSet::default();
        let mut key = Vec::new();
        for row in src.rows() {
            project_into(&mut key, row, &src_pos);
            if !keys.contains(key.as_slice()) {
                keys.insert(key.clone());
            }
        }
        self.counters.rows += (src.len() + tables[target].len()) as u64;
        let dst = &mut tables[target];
        let dst_pos = dst.positions(sep.iter());
        dst.retain_rows(|_, row| {
            project_into(&mut key, row, &dst_pos);
            keys.contains(key.as_slice())
        });
    }

    /// Number of answers per assignment of `group` (all inside one atom),
    /// with existential extensions and duplicate rows counted, in
    /// first-seen order.
    fn counts_by(&mut self, group: &[VarId]) -> Result<Vec<(Vec<Value>, u128)>> {
        let tables = self.filtered();
        let root = (0..tables.len())
            .find(|&a| group.iter().all(|&v| tables[a].position(v).is_some()))
            .ok_or_else(|| Error::Internal("grouping variables span several atoms".into()))?;
        let (parent, preorder) = self.tree.rooted_at(root);
        let mut up: Vec<Option<KeyMap<u128>>> = vec![None; tables.len()];
        let mut key = Vec::new();
        let mut out: Vec<(Vec<Value>, u128)> = Vec::new();
        for &u in preorder.iter().rev() {
            let table = &tables[u];
            self.counters.rows += table.len() as u64;
            let children: Vec<(KeyMap<u128>, Vec<usize>)> = (0..tables.len())
                .filter(|&c| parent[c] == Some(u))
                .map(|c| {
                    let sep = self.tree.edges[c].intersect(self.tree.edges[u]);
                    (up[c].take().expect("children first"), table.positions(sep.iter()))
                })
                .collect();
            let out_pos = match parent[u] {
                Some(p) => table.positions(self.tree.edges[u].intersect(self.tree.edges[p]).iter()),
                None => table.positions(group.iter().copied()),
            };
            let mut groups = KeyMap::<usize>::default();
            let mut sums: Vec<(Vec<Value>, u128)> = Vec::new();
            'rows: for row in table.rows() {
                let mut cnt = 1u128;
                for (map, pos) in &children {
                    project_into(&mut key, row, pos);
                    match map.get(key.as_slice()) {
                        Some(&s) => cnt = checked_mul(cnt, s)?,
                        None => continue 'rows,
                    }
                }
                project_into(&mut key, row, &out_pos);
                match groups.get(key.as_slice()) {
                    Some(&slot) => sums[slot].1 = checked_add(sums[slot].1, cnt)?,
                    None => {
                        groups.insert(key.clone(), sums.len());
                        sums.push((key.clone(), cnt));
                    }
                }
            }
            if parent[u].is_some() {
                up[u] = Some(sums.into_iter().collect());
            } else {
                out = sums;
            }
        }
        Ok(out)
    }

    /// Fixes `seq` one variable at a time, carrying the residual rank. The
    /// first round also yields the number of answers consistent with what is
    /// already fixed, against which `k` is checked.
    fn descend<R: Rng>(&mut self, seq: &[VarId], mut k: u128, fixed: &mut [Option<Value>], rng: &mut R) -> Result<()> {
        if seq.is_empty() {
            let count = self
                .counts_by(&[])?
                .into_iter()
                .try_fold(0u128, |a, (_, w)| checked_add(a, w))?;
            return if k < count {
                Ok(())
            } else {
                Err(Error::OutOfRange { k, count })
            };
        }
        for (round, &x) in seq.iter().enumerate() {
            let mut items: Vec<WeightedItem<Value>> = self
                .counts_by(&[x])?
                .into_iter()
                .map(|(mut key, w)| WeightedItem::new(key.pop().expect("one grouping variable"), w))
                .collect();
            if round == 0 {
                let count = items.iter().try_fold(0u128, |a, i| checked_add(a, i.weight))?;
                if k >= count {
                    return Err(Error::OutOfRange { k, count });
                }
            }
            let (value, rest) = weighted_select(&mut items, k, rng)?;
            self.fix(x, &value);
            fixed[x] = Some(value);
            k = rest;
        }
        Ok(())
    }
}

fn routed(report: &TractabilityReport, mode: Mode) -> Result<()> {
    if report.supports(mode) {
        Ok(())
    } else {
        Err(Error::NotRouted(report.verdict(mode).reasons.clone()))
    }
}

fn finish(q: &Query, fixed: Vec<Option<Value>>) -> AnswerTuple {
    AnswerTuple::new(
        head_names(q),
        fixed
            .into_iter()
            .map(|v| v.expect("every head variable fixed"))
            .collect(),
    )
}

/// For each value `v` of `x` consistent with `fixed`, the number of answers
/// extending `fixed ∪ {x = v}`, in first-seen order.
pub fn conditional_value_counts(
    q: &Query,
    db: &Instance,
    fixed: &[(&str, Value)],
    x: &str,
) -> Result<Vec<(Value, u128)>> {
    let id = |name: &str| q.var_id(name).ok_or_else(|| Error::UnknownVariable(name.to_string()));
    let mut sel = Selector::new(q, db)?;
    for (name, value) in fixed {
        sel.fix(id(name)?, value);
    }
    Ok(sel
        .counts_by(&[id(x)?])?
        .into_iter()
        .map(|(mut key, w)| (key.pop().expect("one grouping variable"), w))
        .collect())
}

/// Result of one selection together with its work counters.
#[derive(Debug, Clone)]
pub struct Selection {
    pub answer: AnswerTuple,
    pub counters: Counters,
}

/// k-th answer under a lex order (any lex order; trios allowed).
pub fn select_lex(q: &Query, db: &Instance, order: &OrderSpec, k: u128, seed: u64) -> Result<AnswerTuple> {
    select_lex_with_stats(q, db, order, k, seed).map(|s| s.answer)
}

pub fn select_lex_with_stats(q: &Query, db: &Instance, order: &OrderSpec, k: u128, seed: u64) -> Result<Selection> {
    let report = analyze(q, order);
    routed(&report, Mode::SingleLex)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sel = Selector::new(q, db)?;
    let mut fixed = vec![None; q.head_len()];
    sel.descend(&report.order.sequence, k, &mut fixed, &mut rng)?;
    Ok(Selection {
        answer: finish(q, fixed),
        counters: sel.counters,
    })
}

/// k-th answer under a sum order whose weights share one atom.
pub fn select_sum(q: &Query, db: &Instance, order: &OrderSpec, k: u128, seed: u64) -> Result<AnswerTuple> {
    select_sum_with_stats(q, db, order, k, seed).map(|s| s.answer)
}

pub fn select_sum_with_stats(q: &Query, db: &Instance, order: &OrderSpec, k: u128, seed: u64) -> Result<Selection> {
    let report = analyze(q, order);
    routed(&report, Mode::SingleSum)?;
    validate_instance(q, db, Some(order))?;
    let resolved = &report.order;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sel = Selector::new(q, db)?;
    let anchor_vars = &resolved.anchor_vars;
    let weight_idx: Vec<usize> = resolved
        .weights
        .iter()
        .map(|w| anchor_vars.iter().position(|a| a == w).expect("weights inside anchor"))
        .collect();
    let mut items = Vec::new();
    for (key, w) in sel.counts_by(anchor_vars)? {
        let weight: i128 = weight_idx
            .iter()
            .map(|&i| key[i].as_int().map(i128::from))
            .sum::<Option<i128>>()
            .ok_or_else(|| Error::Internal("non-integer weight".into()))?;
        items.push(WeightedItem::new((weight, key), w));
    }
    let count = items.iter().try_fold(0u128, |a, i| checked_add(a, i.weight))?;
    if k >= count {
        return Err(Error::OutOfRange { k, count });
    }
    let ((_, values), rest) = weighted_select(&mut items, k, &mut rng)?;
    let mut fixed = vec![None; q.head_len()];
    for (&v, value) in anchor_vars.iter().zip(values) {
        sel.fix(v, &value);
        fixed[v] = Some(value);
    }
    sel.descend(&resolved.sequence[anchor_vars.len()..], rest, &mut fixed, &mut rng)?;
    Ok(Selection {
        answer: finish(q, fixed),
        counters: sel.counters,
    })
}
