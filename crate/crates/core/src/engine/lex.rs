use std::cmp::Ordering;
use std::sync::Arc;

use crate::analysis::VariableTree;
use crate::bind::{AnswerTuple, Counters, KeyMap};
use crate::error::{checked_mul, Error, Result};
use crate::query::VarId;
use crate::value::Value;

use super::reduce::ReducedDb;

#[derive(Debug, Clone, Copy)]
struct Group {
    start: usize,
    end: usize,
    total: u128,
}

/// Candidate table of one variable of the order. Rows are grouped by the
/// assignment to the variable's preceding neighbours; within a group,
/// candidate values ascend and `cum` holds inclusive prefix sums of `weight`.
#[derive(Debug, Clone)]
struct Layer {
    /// Positions (in the order) of the preceding neighbours, ascending.
    key_pos: Vec<usize>,
    groups: KeyMap<Group>,
    values: Vec<Value>,
    weight: Vec<u128>,
    cum: Vec<u128>,
}

impl Layer {
    fn group(&self, assigned: &[Value], key: &mut Vec<Value>) -> Option<Group> {
        key.clear();
        key.extend(self.key_pos.iter().map(|&p| assigned[p].clone()));
        self.groups.get(key.as_slice()).copied()
    }
}

/// First index in `start..end` with `cum[j] > q`; counts probes.
fn search_cum(cum: &[u128], start: usize, end: usize, q: u128, probes: &mut u64) -> usize {
    let (mut lo, mut hi) = (start, end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *probes += 1;
        if cum[mid] > q {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn search_value(values: &[Value], start: usize, end: usize, v: &Value, probes: &mut u64) -> Option<usize> {
    let (mut lo, mut hi) = (start, end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *probes += 1;
        match values[mid].cmp(v) {
            Ordering::Less => lo = mid + 1,
            Ordering::Greater => hi = mid,
            Ordering::Equal => return Some(mid),
        }
    }
    None
}

/// Row ids ordered by their `W`-wide key tuples in `keys`. Sorting the
/// tuples themselves keeps the comparisons in cache.
fn sort_fixed<const W: usize>(keys: &[Value], counters: &mut Counters) -> Vec<u32> {
    let mut items: Vec<([Value; W], u32)> = keys
        .chunks_exact(W)
        .enumerate()
        .map(|(i, c)| (std::array::from_fn(|j| c[j].clone()), i as u32))
        .collect();
    let mut comparisons = 0u64;
    items.sort_unstable_by(|a, b| {
        comparisons += 1;
        a.0.cmp(&b.0)
    });
    counters.comparisons += comparisons;
    counters.sorts += 1;
    items.into_iter().map(|(_, i)| i).collect()
}

/// Preprocessed structure simulating the array of answers sorted
/// lexicographically by a trio-free order of all head variables.
#[derive(Debug, Clone)]
pub struct AccessIndex {
    head: Arc<[String]>,
    order: Vec<VarId>,
    layers: Vec<Layer>,
    count: u128,
    /// Answers per value block of the first variable's group, i.e. the
    /// product of the other roots' totals and the scalar factor.
    first_multiplier: u128,
    max_group: usize,
    pub preprocess: Counters,
}

/// Per-call counters for one access.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessStats {
    pub probes: u64,
}

impl AccessIndex {
    pub(crate) fn build(
        head: Arc<[String]>,
        db: &ReducedDb,
        tree: &VariableTree,
        mut counters: Counters,
    ) -> Result<AccessIndex> {
        let f = tree.order.len();
        let mut position = vec![usize::MAX; head.len()];
        for (i, &v) in tree.order.iter().enumerate() {
            position[v] = i;
        }
        // Lookup tables for atoms assigned to a variable other than through
        // its anchor; an anchor's own multiplicities are read by row.
        let mut mult_maps: Vec<Option<KeyMap<u128>>> = vec![None; db.relations.len()];
        for node in &tree.nodes {
            for &a in node.assigned.iter().filter(|&&a| a != node.anchor) {
                let rel = &db.relations[a];
                let map = rel
                    .table
                    .rows()
                    .zip(&rel.mult)
                    .map(|(row, &m)| (row.to_vec(), m))
                    .collect();
                mult_maps[a] = Some(map);
            }
        }

        let mut layers: Vec<Option<Layer>> = vec![None; f];
        let mut max_group = 0;
        for i in (0..f).rev() {
            let node = &tree.nodes[i];
            let mut key_pos: Vec<usize> = node.preceding.iter().map(|&v| position[v]).collect();
            key_pos.sort_unstable();
            // Tuple layout below: preceding neighbours by position, then the variable.
            let tuple_vars: Vec<VarId> = key_pos
                .iter()
                .map(|&p| tree.order[p])
                .chain(std::iter::once(node.var))
                .collect();
            let tuple_index = |v: VarId| tuple_vars.iter().position(|&x| x == v).expect("covered variable");

            let anchor = &db.relations[node.anchor].table;
            let anchor_pos = anchor.positions(tuple_vars.iter().copied());
            counters.rows += anchor.len() as u64;
            // Sort keys laid out contiguously, one tuple per anchor row.
            let w = anchor_pos.len();
            let mut keys: Vec<Value> = Vec::with_capacity(anchor.len() * w);
            for row in anchor.rows() {
                keys.extend(anchor_pos.iter().map(|&p| row[p].clone()));
            }
            let tuple_of = |r: u32| &keys[r as usize * w..(r as usize + 1) * w];
            let rows = match w {
                1 => sort_fixed::<1>(&keys, &mut counters),
                2 => sort_fixed::<2>(&keys, &mut counters),
                3 => sort_fixed::<3>(&keys, &mut counters),
                _ => {
                    let mut rows: Vec<u32> = (0..anchor.len() as u32).collect();
                    let mut comparisons = 0u64;
                    rows.sort_unstable_by(|&x, &y| {
                        comparisons += 1;
                        tuple_of(x).cmp(tuple_of(y))
                    });
                    counters.comparisons += comparisons;
                    counters.sorts += 1;
                    rows
                }
            };

            let own_mult = node
                .assigned
                .contains(&node.anchor)
                .then(|| &db.relations[node.anchor].mult);
            let assigned: Vec<(&KeyMap<u128>, Vec<usize>)> = node
                .assigned
                .iter()
                .filter(|&&a| a != node.anchor)
                .map(|&a| {
                    let idx = db.relations[a].vars().iter().map(|&v| tuple_index(v)).collect();
                    (mult_maps[a].as_ref().expect("built above"), idx)
                })
                .collect();
            let children: Vec<(usize, Vec<usize>)> = tree
                .children(i)
                .map(|c| {
                    let child = layers[c].as_ref().expect("children built first");
                    let idx = child.key_pos.iter().map(|&p| tuple_index(tree.order[p])).collect();
                    (c, idx)
                })
                .collect();

            let k = key_pos.len();
            let mut layer = Layer {
                key_pos,
                groups: KeyMap::default(),
                values: Vec::new(),
                weight: Vec::new(),
                cum: Vec::new(),
            };
            let mut tuple: Vec<Value> = Vec::with_capacity(k + 1);
            let mut prev: Option<u32> = None;
            let mut lookup = Vec::new();
            let mut open: Option<(Vec<Value>, usize, u128)> = None;
            for &r in &rows {
                if prev.is_some_and(|p| tuple_of(p) == tuple_of(r)) {
                    continue;
                }
                prev = Some(r);
                tuple.clear();
                tuple.extend_from_slice(tuple_of(r));

                let mut g = own_mult.map_or(1, |m| m[r as usize]);
                for (map, idx) in &assigned {
                    lookup.clear();
                    lookup.extend(idx.iter().map(|&j| tuple[j].clone()));
                    g = checked_mul(g, map.get(lookup.as_slice()).copied().unwrap_or(0))?;
                }
                for (c, idx) in &children {
                    lookup.clear();
                    lookup.extend(idx.iter().map(|&j| tuple[j].clone()));
                    let total = layers[*c]
                        .as_ref()
                        .and_then(|l| l.groups.get(lookup.as_slice()))
                        .map_or(0, |grp| grp.total);
                    g = checked_mul(g, total)?;
                }
                if g == 0 {
                    continue;
                }

                let same_group = open.as_ref().is_some_and(|(key, _, _)| key[..] == tuple[..k]);
                if !same_group {
                    if let Some((key, start, total)) = open.take() {
                        let end = layer.values.len();
                        max_group = max_group.max(end - start);
                        layer.groups.insert(key, Group { start, end, total });
                    }
                    open = Some((tuple[..k].to_vec(), layer.values.len(), 0));
                }
                let (_, _, total) = open.as_mut().expect("group opened");
                *total = total.checked_add(g).ok_or(Error::CountOverflow)?;
                layer.values.push(tuple[k].clone());
                layer.weight.push(g);
                layer.cum.push(*total);
            }
            if let Some((key, start, total)) = open.take() {
                let end = layer.values.len();
                max_group = max_group.max(end - start);
                layer.groups.insert(key, Group { start, end, total });
            }
            debug_assert!(layer
                .groups
                .values()
                .all(|g| { layer.weight[g.start..g.end].iter().sum::<u128>() == g.total }));
            layers[i] = Some(layer);
        }
        let layers: Vec<Layer> = layers.into_iter().map(|l| l.expect("built")).collect();

        let mut count = db.scalar()?;
        let mut first_multiplier = count;
        for (i, node) in tree.nodes.iter().enumerate() {
            if node.parent.is_none() {
                let total = layers[i].groups.get(&[][..]).map_or(0, |g| g.total);
                count = checked_mul(count, total)?;
                if i != 0 {
                    first_multiplier = checked_mul(first_multiplier, total)?;
                }
            }
        }
        Ok(AccessIndex {
            head,
            order: tree.order.clone(),
            layers,
            count,
            first_multiplier,
            max_group,
            preprocess: counters,
        })
    }

    /// Number of answers, counting duplicates.
    pub fn count(&self) -> u128 {
        self.count
    }

    /// The full variable order the index is sorted by.
    pub fn order(&self) -> &[VarId] {
        &self.order
    }

    /// Largest candidate group; bounds the probes of one binary search.
    pub fn max_group(&self) -> usize {
        self.max_group
    }

    /// The answer at zero-based position `k`.
    pub fn access(&self, k: u128) -> Result<AnswerTuple> {
        self.access_with_stats(k).map(|(a, _)| a)
    }

    pub fn access_with_stats(&self, k: u128) -> Result<(AnswerTuple, AccessStats)> {
        if k >= self.count {
            return Err(Error::OutOfRange { k, count: self.count });
        }
        let mut stats = AccessStats::default();
        let mut assigned: Vec<Value> = Vec::with_capacity(self.layers.len());
        let mut key = Vec::new();
        let mut rest = k;
        let mut pending = self.first_multiplier;
        for (i, layer) in self.layers.iter().enumerate() {
            let group = layer
                .group(&assigned, &mut key)
                .ok_or_else(|| Error::Internal("missing candidate group during access".into()))?;
            // Answers per unit of candidate weight in this group.
            let m = if i == 0 { pending } else { pending / group.total };
            let j = search_cum(&layer.cum, group.start, group.end, rest / m, &mut stats.probes);
            let before = layer.cum[j] - layer.weight[j];
            rest -= m * before;
            pending = m * layer.weight[j];
            assigned.push(layer.values[j].clone());
        }
        Ok((self.answer(assigned), stats))
    }

    /// Start position and length of the block of answers whose first
    /// `prefix.len()` order variables equal `prefix`, or `None` if empty.
    pub fn prefix_block(&self, prefix: &[Value]) -> Option<(u128, u128)> {
        let mut probes = 0;
        let mut assigned: Vec<Value> = Vec::with_capacity(prefix.len());
        let mut key = Vec::new();
        let mut start = 0u128;
        let mut pending = self.first_multiplier;
        if self.count == 0 {
            return None;
        }
        for (i, v) in prefix.iter().enumerate() {
            let layer = &self.layers[i];
            let group = layer.group(&assigned, &mut key)?;
            let m = if i == 0 { pending } else { pending / group.total };
            let j = search_value(&layer.values, group.start, group.end, v, &mut probes)?;
            start += m * (layer.cum[j] - layer.weight[j]);
            pending = m * layer.weight[j];
            assigned.push(v.clone());
        }
        if prefix.is_empty() {
            return Some((0, self.count));
        }
        Some((start, pending))
    }

    fn answer(&self, assigned: Vec<Value>) -> AnswerTuple {
        let mut values = vec![Value::Int(0); self.head.len()];
        for (v, &var) in assigned.into_iter().zip(&self.order) {
            values[var] = v;
        }
        AnswerTuple::new(self.head.clone(), values)
    }
}
