//! Atoms bound to instance data as flat tables over deduplicated variables.

use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Serialize, Serializer};

use crate::data::{validate_instance, Instance};
use crate::error::Result;
use crate::query::{Query, VarId};
use crate::value::Value;

/// Row-major table over a list of distinct variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub vars: Vec<VarId>,
    len: usize,
    data: Vec<Value>,
}

impl Table {
    pub fn new(vars: Vec<VarId>) -> Table {
        Table {
            vars,
            len: 0,
            data: Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, i: usize) -> &[Value] {
        let a = self.arity();
        &self.data[i * a..(i + 1) * a]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Value]> + '_ {
        (0..self.len).map(move |i| self.row(i))
    }

    pub fn push(&mut self, row: &[Value]) {
        debug_assert_eq!(row.len(), self.arity());
        self.data.extend_from_slice(row);
        self.len += 1;
    }

    pub fn push_projected(&mut self, row: &[Value], positions: &[usize]) {
        self.data.extend(positions.iter().map(|&p| row[p].clone()));
        self.len += 1;
    }

    /// Column index of `v`.
    pub fn position(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    /// Column indices of `vars`, which must all be present.
    pub fn positions(&self, vars: impl IntoIterator<Item = VarId>) -> Vec<usize> {
        vars.into_iter()
            .map(|v| self.position(v).expect("variable bound by table"))
            .collect()
    }

    /// Keeps the rows for which `keep` holds, preserving order.
    pub fn retain_rows(&mut self, mut keep: impl FnMut(usize, &[Value]) -> bool) {
        let a = self.arity();
        let mut out = Vec::with_capacity(self.data.len());
        let mut len = 0;
        for i in 0..self.len {
            let row = &self.data[i * a..(i + 1) * a];
            if keep(i, row) {
                out.extend_from_slice(row);
                len += 1;
            }
        }
        self.data = out;
        self.len = len;
    }
}

/// Writes the values at `positions` of `row` into `buf`.
pub(crate) fn project_into(buf: &mut Vec<Value>, row: &[Value], positions: &[usize]) {
    buf.clear();
    buf.extend(positions.iter().map(|&p| row[p].clone()));
}

pub(crate) type KeyMap<V> = FxHashMap<Vec<Value>, V>;

/// Binds every atom of `q` to its relation. Atoms with repeated variables keep
/// only rows whose repeated positions agree and expose each variable once.
pub fn bind_atoms(q: &Query, db: &Instance) -> Result<Vec<Table>> {
    validate_instance(q, db, None)?;
    Ok((0..q.atoms.len()).map(|a| bind_atom(q, db, a)).collect())
}

fn bind_atom(q: &Query, db: &Instance, atom: usize) -> Table {
    let ids = q.atom_var_ids(atom);
    let mut vars = Vec::new();
    let mut keep_pos = Vec::new();
    // (position, first position of the same variable)
    let mut equalities = Vec::new();
    for (p, &v) in ids.iter().enumerate() {
        match vars.iter().position(|&x| x == v) {
            Some(first) => equalities.push((p, keep_pos[first])),
            None => {
                vars.push(v);
                keep_pos.push(p);
            }
        }
    }
    let rel = &db.relations[&q.atoms[atom].relation];
    let mut table = Table::new(vars);
    table.data.reserve(rel.len() * table.arity());
    for row in &rel.rows {
        if equalities.iter().all(|&(p, f)| row[p] == row[f]) {
            table.push_projected(row, &keep_pos);
        }
    }
    table
}

/// Instrumentation counters returned by each operation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    /// Comparator calls made by sorts.
    pub comparisons: u64,
    /// Binary-search probes.
    pub probes: u64,
    /// Input rows scanned.
    pub rows: u64,
    /// Sort routines invoked.
    pub sorts: u64,
}

impl Counters {
    pub fn add(&mut self, other: Counters) {
        self.comparisons += other.comparisons;
        self.probes += other.probes;
        self.rows += other.rows;
        self.sorts += other.sorts;
    }
}

/// One answer: values for the head variables, in head order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnswerTuple {
    pub head: Arc<[String]>,
    pub values: Vec<Value>,
}

impl AnswerTuple {
    pub fn new(head: Arc<[String]>, values: Vec<Value>) -> AnswerTuple {
        debug_assert_eq!(head.len(), values.len());
        AnswerTuple { head, values }
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.head.iter().position(|h| h == var).map(|i| &self.values[i])
    }
}

impl Serialize for AnswerTuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (name, value) in self.head.iter().zip(&self.values) {
            map.serialize_entry(name, value)?;
        }
        map.end()
    }
}

pub(crate) fn head_names(q: &Query) -> Arc<[String]> {
    q.head.clone().into()
}
