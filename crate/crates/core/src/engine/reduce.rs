//! Reduction of a free-connex query to weighted relations over head variables.
//!
//! A join tree of the atoms plus one extra node holding the head variables is
//! rooted at that extra node. Each subtree hanging off it is counted bottom-up,
//! so a direct child of the head node becomes a relation over its head
//! variables whose multiplicity is the number of extensions of its subtree.
//! Deeper atoms only filter and keep multiplicity 1. A final semi-join pass in
//! both directions removes every row that joins with nothing.

use crate::analysis::{gyo_join_tree, Hypergraph, JoinTree, VarSet};
use crate::bind::{project_into, Counters, KeyMap, Table};
use crate::error::{checked_add, checked_mul, Error, Result};
use crate::query::VarId;
use crate::value::Value;
use rustc_hash::{FxHashMap, FxHashSet};

/// A relation over head variables (ascending ids) with a multiplicity per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedRelation {
    pub table: Table,
    pub mult: Vec<u128>,
}

impl WeightedRelation {
    pub fn vars(&self) -> &[VarId] {
        &self.table.vars
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    fn retain(&mut self, mut keep: impl FnMut(&[Value]) -> bool) {
        let mut flags = Vec::with_capacity(self.len());
        self.table.retain_rows(|_, row| {
            let k = keep(row);
            flags.push(k);
            k
        });
        let mut it = flags.into_iter();
        self.mult.retain(|_| it.next().unwrap_or(false));
    }
}

/// One weighted relation per atom; their bag join is the bag of answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedDb {
    pub relations: Vec<WeightedRelation>,
}

impl ReducedDb {
    /// Product of the multiplicities of zero-arity relations (0 if one is empty).
    pub fn scalar(&self) -> Result<u128> {
        let mut c = 1u128;
        for r in self.relations.iter().filter(|r| r.vars().is_empty()) {
            let m = r.mult.iter().try_fold(0u128, |a, &b| checked_add(a, b))?;
            c = checked_mul(c, m)?;
        }
        Ok(c)
    }
}

/// Reduces bound atoms (over all variables) to head variables `0..head`.
/// The query must be free-connex.
pub fn reduce(tables: &[Table], head: usize, counters: &mut Counters) -> Result<ReducedDb> {
    let m = tables.len();
    let head_set = VarSet::prefix(head);
    let mut edges: Vec<VarSet> = tables
        .iter()
        .map(|t| VarSet::from_ids(t.vars.iter().copied()))
        .collect();
    edges.push(head_set);
    let tree = gyo_join_tree(&Hypergraph::new(edges))
        .tree()
        .ok_or_else(|| Error::Internal("query is not free-connex".into()))?;
    let (parent, preorder) = tree.rooted_at(m);

    // Bottom-up extension counts; `up[u]` maps the separator with u's parent
    // to the summed counts of u's rows.
    let mut cnt: Vec<Vec<u128>> = tables.iter().map(|t| vec![1u128; t.len()]).collect();
    let mut up: Vec<Option<KeyMap<u128>>> = vec![None; m];
    let mut relations: Vec<Option<WeightedRelation>> = vec![None; m];
    let mut key = Vec::new();
    for &u in preorder.iter().rev().filter(|&&u| u != m) {
        let table = &tables[u];
        counters.rows += table.len() as u64;
        for c in (0..m).filter(|&c| parent[c] == Some(u)) {
            let child_map = up[c].take().expect("children are processed first");
            let pos = table.positions(tree.edges[c].intersect(tree.edges[u]).iter());
            for (i, row) in table.rows().enumerate() {
                if cnt[u][i] == 0 {
                    continue;
                }
                project_into(&mut key, row, &pos);
                cnt[u][i] = match child_map.get(key.as_slice()) {
                    Some(&s) => checked_mul(cnt[u][i], s)?,
                    None => 0,
                };
            }
        }
        let own_head: Vec<VarId> = tree.edges[u].intersect(head_set).iter().collect();
        let head_pos = table.positions(own_head.iter().copied());
        if parent[u] == Some(m) {
            relations[u] = Some(project_summed(table, &cnt[u], own_head, &head_pos, true)?);
        } else {
            relations[u] = Some(project_summed(table, &cnt[u], own_head, &head_pos, false)?);
            let p = parent[u].expect("non-root node");
            let sep_pos = table.positions(tree.edges[u].intersect(tree.edges[p]).iter());
            let mut map: KeyMap<u128> = KeyMap::default();
            for (i, row) in table.rows().enumerate() {
                if cnt[u][i] > 0 {
                    project_into(&mut key, row, &sep_pos);
                    match map.get_mut(key.as_slice()) {
                        Some(slot) => *slot = checked_add(*slot, cnt[u][i])?,
                        None => {
                            map.insert(key.clone(), cnt[u][i]);
                        }
                    }
                }
            }
            up[u] = Some(map);
        }
    }
    let mut db = ReducedDb {
        relations: relations.into_iter().map(|r| r.expect("every atom reduced")).collect(),
    };
    full_reduction(&mut db, counters)?;
    Ok(db)
}

/// Projects rows with nonzero count onto `vars`. With `sum`, duplicates add
/// their counts; otherwise the projection is deduplicated with multiplicity 1.
fn project_summed(table: &Table, cnt: &[u128], vars: Vec<VarId>, pos: &[usize], sum: bool) -> Result<WeightedRelation> {
    let mut out = Table::new(vars);
    let mut mult = Vec::new();
    if pos.iter().copied().eq(0..table.arity()) {
        // Identity projection: rows serve as their own keys.
        let mut index: FxHashMap<&[Value], usize> = FxHashMap::default();
        for (i, row) in table.rows().enumerate() {
            if cnt[i] == 0 {
                continue;
            }
            match index.get(row) {
                Some(&slot) => {
                    if sum {
                        mult[slot] = checked_add(mult[slot], cnt[i])?;
                    }
                }
                None => {
                    index.insert(row, mult.len());
                    out.push(row);
                    mult.push(if sum { cnt[i] } else { 1 });
                }
            }
        }
        return Ok(WeightedRelation { table: out, mult });
    }
    let mut index: KeyMap<usize> = KeyMap::default();
    let mut key = Vec::new();
    for (i, row) in table.rows().enumerate() {
        if cnt[i] == 0 {
            continue;
        }
        project_into(&mut key, row, pos);
        match index.get(key.as_slice()) {
            Some(&slot) => {
                if sum {
                    mult[slot] = checked_add(mult[slot], cnt[i])?;
                }
            }
            None => {
                index.insert(key.clone(), mult.len());
                out.push(&key);
                mult.push(if sum { cnt[i] } else { 1 });
            }
        }
    }
    Ok(WeightedRelation { table: out, mult })
}

/// Semi-join reduction, bottom-up then top-down, over a join tree of the
/// relations' variable sets.
fn full_reduction(db: &mut ReducedDb, counters: &mut Counters) -> Result<()> {
    if db.relations.is_empty() {
        return Ok(());
    }
    let edges: Vec<VarSet> = db
        .relations
        .iter()
        .map(|r| VarSet::from_ids(r.vars().iter().copied()))
        .collect();
    let tree: JoinTree = gyo_join_tree(&Hypergraph::new(edges))
        .tree()
        .ok_or_else(|| Error::Internal("head-restricted hypergraph is cyclic".into()))?;
    let root = tree.root().expect("nonempty tree");
    let (parent, preorder) = tree.rooted_at(root);
    for &c in preorder.iter().rev() {
        if let Some(p) = parent[c] {
            semi_join(db, p, c, &tree, counters);
        }
    }
    for &p in &preorder {
        for c in (0..tree.len()).filter(|&c| parent[c] == Some(p)) {
            semi_join(db, c, p, &tree, counters);
        }
    }
    Ok(())
}

/// Keeps the rows of `target` that agree with some row of `source`.
fn semi_join(db: &mut ReducedDb, target: usize, source: usize, tree: &JoinTree, counters: &mut Counters) {
    let sep: Vec<VarId> = tree.edges[target].intersect(tree.edges[source]).iter().collect();
    let (src, tgt) = if source < target {
        let (a, b) = db.relations.split_at_mut(target);
        (&a[source].table, &mut b[0])
    } else {
        let (a, b) = db.relations.split_at_mut(source);
        (&b[0].table, &mut a[target])
    };
    counters.rows += (src.len() + tgt.len()) as u64;
    let src_pos = src.positions(sep.iter().copied());
    let tgt_pos = tgt.table.positions(sep.iter().copied());
    let mut key = Vec::new();
    // Separator columns are usually adjacent, so source keys can borrow rows.
    let run = match src_pos.first() {
        Some(&first) if src_pos.iter().copied().eq(first..first + src_pos.len()) => Some(first..first + src_pos.len()),
        Some(_) => None,
        None => Some(0..0),
    };
    if let Some(run) = run {
        let keys: FxHashSet<&[Value]> = src.rows().map(|row| &row[run.clone()]).collect();
        tgt.retain(|row| {
            project_into(&mut key, row, &tgt_pos);
            keys.contains(key.as_slice())
        });
        return;
    }
    let mut keys: KeyMap<()> = KeyMap::default();
    for row in src.rows() {
        project_into(&mut key, row, &src_pos);
        if !keys.contains_key(key.as_slice()) {
            keys.insert(key.clone(), ());
        }
    }
    tgt.retain(|row| {
        project_into(&mut key, row, &tgt_pos);
        keys.contains_key(key.as_slice())
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bind::bind_atoms;
    use crate::data::{Instance, Relation};
    use crate::query::parse_query;

    fn ints(rows: &[&[Value]]) -> Vec<Vec<i64>> {
        rows.iter()
            .map(|r| r.iter().map(|v| v.as_int().unwrap()).collect())
            .collect()
    }

    fn relation_rows(r: &WeightedRelation) -> Vec<(Vec<i64>, u128)> {
        let rows: Vec<&[Value]> = r.table.rows().collect();
        let mut out: Vec<_> = ints(&rows).into_iter().zip(r.mult.iter().copied()).collect();
        out.sort();
        out
    }

    #[test]
    fn projection_carries_multiplicity() {
        let q = parse_query("Q(A,B) :- R(A,B), S(B,C).").unwrap();
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 1], &[1, 2], &[2, 1]]))
            .with(Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[2, 20], &[2, 30]]));
        let tables = bind_atoms(&q, &db).unwrap();
        let red = reduce(&tables, 2, &mut Counters::default()).unwrap();
        assert_eq!(red.relations[1].vars(), [1]);
        // Multiplicity lives on exactly one side of the join.
        let r = relation_rows(&red.relations[0]);
        let s = relation_rows(&red.relations[1]);
        let total: u128 = r
            .iter()
            .map(|(row, m)| m * s.iter().filter(|(k, _)| k[0] == row[1]).map(|(_, n)| n).sum::<u128>())
            .sum();
        // (1,1) extends once, (1,2) twice, (2,1) once.
        assert_eq!(total, 4);
    }

    #[test]
    fn dangling_rows_removed() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 1], &[2, 9]]))
            .with(Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[7, 20]]));
        let tables = bind_atoms(&q, &db).unwrap();
        let red = reduce(&tables, 3, &mut Counters::default()).unwrap();
        assert_eq!(relation_rows(&red.relations[0]), [(vec![1, 1], 1)]);
        assert_eq!(relation_rows(&red.relations[1]), [(vec![1, 10], 1)]);
    }

    #[test]
    fn duplicate_input_rows_add_up() {
        let q = parse_query("Q(A) :- R(A).").unwrap();
        let db = Instance::new().with(Relation::from_ints("R", &["A"], &[&[1], &[1], &[2]]));
        let tables = bind_atoms(&q, &db).unwrap();
        let red = reduce(&tables, 1, &mut Counters::default()).unwrap();
        assert_eq!(relation_rows(&red.relations[0]), [(vec![1], 2), (vec![2], 1)]);
    }

    #[test]
    fn boolean_query_scalar() {
        let q = parse_query("Q() :- R(A,B), S(B).").unwrap();
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 1], &[2, 1], &[3, 2]]))
            .with(Relation::from_ints("S", &["B"], &[&[1], &[1]]));
        let tables = bind_atoms(&q, &db).unwrap();
        let red = reduce(&tables, 0, &mut Counters::default()).unwrap();
        assert_eq!(red.scalar().unwrap(), 4);
    }
}
