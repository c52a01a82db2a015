//! Index nested-loop evaluation of arbitrary (including cyclic) queries.

use crate::bind::{project_into, KeyMap, Table};
use crate::error::{Error, Result};
use crate::query::{Query, VarId};
use crate::value::Value;

struct Step {
    atom: usize,
    /// Columns of the atom holding variables bound earlier.
    probe_pos: Vec<usize>,
    probe_vars: Vec<VarId>,
    /// Columns binding new variables, with the variable they bind.
    bind: Vec<(usize, VarId)>,
    index: KeyMap<Vec<u32>>,
}

/// Streams every full join assignment, projected onto the head, to `emit`.
/// Stops with `ResultTooLarge` once more than `cap` answers are produced.
pub(crate) fn for_each_answer(q: &Query, tables: &[Table], cap: u64, mut emit: impl FnMut(&[Value])) -> Result<u64> {
    let steps = plan(q, tables);
    let mut assignment = vec![Value::Int(0); q.variables().len()];
    let mut produced = 0u64;
    let mut key = Vec::new();
    walk(
        &steps,
        tables,
        0,
        &mut assignment,
        &mut key,
        q.head_len(),
        cap,
        &mut produced,
        &mut emit,
    )?;
    Ok(produced)
}

/// Greedy atom order: each next atom shares the most already-bound variables.
fn plan(q: &Query, tables: &[Table]) -> Vec<Step> {
    let mut bound = vec![false; q.variables().len()];
    let mut used = vec![false; tables.len()];
    let mut steps = Vec::with_capacity(tables.len());
    for _ in 0..tables.len() {
        let atom = (0..tables.len())
            .filter(|&a| !used[a])
            .max_by_key(|&a| {
                let shared = tables[a].vars.iter().filter(|&&v| bound[v]).count();
                (shared, std::cmp::Reverse(a))
            })
            .expect("an unused atom remains");
        used[atom] = true;
        let t = &tables[atom];
        let mut probe_pos = Vec::new();
        let mut probe_vars = Vec::new();
        let mut bind = Vec::new();
        for (p, &v) in t.vars.iter().enumerate() {
            if bound[v] {
                probe_pos.push(p);
                probe_vars.push(v);
            } else {
                bind.push((p, v));
            }
        }
        for &(_, v) in &bind {
            bound[v] = true;
        }
        let mut index: KeyMap<Vec<u32>> = KeyMap::default();
        let mut key = Vec::new();
        for (i, row) in t.rows().enumerate() {
            project_into(&mut key, row, &probe_pos);
            match index.get_mut(key.as_slice()) {
                Some(ids) => ids.push(i as u32),
                None => {
                    index.insert(key.clone(), vec![i as u32]);
                }
            }
        }
        steps.push(Step {
            atom,
            probe_pos,
            probe_vars,
            bind,
            index,
        });
    }
    steps
}

#[allow(clippy::too_many_arguments)]
fn walk(
    steps: &[Step],
    tables: &[Table],
    level: usize,
    assignment: &mut Vec<Value>,
    key: &mut Vec<Value>,
    head: usize,
    cap: u64,
    produced: &mut u64,
    emit: &mut impl FnMut(&[Value]),
) -> Result<()> {
    let Some(step) = steps.get(level) else {
        *produced += 1;
        if *produced > cap {
            return Err(Error::ResultTooLarge { cap });
        }
        emit(&assignment[..head]);
        return Ok(());
    };
    key.clear();
    key.extend(step.probe_vars.iter().map(|&v| assignment[v].clone()));
    debug_assert_eq!(step.probe_pos.len(), key.len());
    let Some(ids) = step.index.get(key.as_slice()) else {
        return Ok(());
    };
    let table = &tables[step.atom];
    for &i in ids {
        let row = table.row(i as usize);
        for &(p, v) in &step.bind {
            assignment[v] = row[p].clone();
        }
        walk(steps, tables, level + 1, assignment, key, head, cap, produced, emit)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bind::bind_atoms;
    use crate::data::{Instance, Relation};
    use crate::query::parse_query;

    #[test]
    fn triangle() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C), T(A,C).").unwrap();
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 2], &[1, 3]]))
            .with(Relation::from_ints("S", &["B", "C"], &[&[2, 5], &[3, 5], &[3, 6]]))
            .with(Relation::from_ints("T", &["A", "C"], &[&[1, 5]]));
        let tables = bind_atoms(&q, &db).unwrap();
        let mut out = Vec::new();
        let n = for_each_answer(&q, &tables, 100, |a| out.push(a.to_vec())).unwrap();
        assert_eq!(n, 2);
        out.sort();
        assert_eq!(out[0], [Value::Int(1), Value::Int(2), Value::Int(5)]);
    }

    #[test]
    fn cap_is_enforced() {
        let q = parse_query("Q(A,B) :- R(A), S(B).").unwrap();
        let db = Instance::new()
            .with(Relation::from_ints("R", &["A"], &[&[1], &[2]]))
            .with(Relation::from_ints("S", &["B"], &[&[1], &[2]]));
        let tables = bind_atoms(&q, &db).unwrap();
        assert!(matches!(
            for_each_answer(&q, &tables, 3, |_| {}),
            Err(Error::ResultTooLarge { cap: 3 })
        ));
    }
}
