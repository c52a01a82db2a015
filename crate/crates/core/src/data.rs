use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::query::{OrderKind, OrderSpec, Query};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Relation {
    /// Builds a relation, rejecting rows whose arity differs from the header.
    pub fn new(name: impl Into<String>, columns: Vec<String>, rows: Vec<Vec<Value>>) -> Result<Relation> {
        let name = name.into();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(Error::RaggedRow {
                path: name.clone().into(),
                line: i as u64 + 2,
                expected: columns.len(),
                found: row.len(),
            });
        }
        Ok(Relation { name, columns, rows })
    }

    /// Integer-only relation; handy in tests and generators.
    pub fn from_ints<S: AsRef<str>>(name: &str, columns: &[S], rows: &[&[i64]]) -> Relation {
        let columns = columns.iter().map(|c| c.as_ref().to_string()).collect();
        let rows = rows
            .iter()
            .map(|r| r.iter().copied().map(Value::Int).collect())
            .collect();
        Relation::new(name, columns, rows).expect("rows match header")
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes the relation as header + rows, comma separated.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        use std::io::Write;
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
        writeln!(out, "{}", self.columns.join(",")).map_err(io_err)?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::to_string).collect();
            writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// A database instance: relations keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub relations: BTreeMap<String, Relation>,
}

impl Instance {
    pub fn new() -> Instance {
        Instance::default()
    }

    /// Adds or replaces a relation.
    pub fn insert(&mut self, relation: Relation) {
        self.relations.insert(relation.name.clone(), relation);
    }

    pub fn with(mut self, relation: Relation) -> Instance {
        self.insert(relation);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    /// Total number of rows across relations referenced by `q` (self-joins count once per atom).
    pub fn input_size(&self, q: &Query) -> usize {
        q.atoms
            .iter()
            .filter_map(|a| self.get(&a.relation))
            .map(Relation::len)
            .sum()
    }

    /// Loads `<dir>/<name>.csv` for every relation named in `q`.
    pub fn load_for_query(dir: &Path, q: &Query) -> Result<Instance> {
        let mut db = Instance::new();
        for atom in &q.atoms {
            if db.get(&atom.relation).is_none() {
                let path = dir.join(format!("{}.csv", atom.relation));
                db.insert(load_relation(&path, &atom.relation)?);
            }
        }
        Ok(db)
    }
}

/// Reads a headered CSV file. Cells that parse as `i64` become `Int`, others `Str`.
/// Quoting is not interpreted; cells must not contain commas.
pub fn load_relation(path: &Path, name: &str) -> Result<Relation> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_reader(file);
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(Error::EmptyHeader(path.to_path_buf())),
    };
    if header.iter().any(str::is_empty) {
        return Err(Error::EmptyHeader(path.to_path_buf()));
    }
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(csv_err)?;
        if record.len() != columns.len() {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line: record.position().map_or(0, |p| p.line()),
                expected: columns.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(Value::parse_cell).collect());
    }
    Ok(Relation {
        name: name.to_string(),
        columns,
        rows,
    })
}

/// Checks that every atom resolves with matching arity and, for sum orders,
/// that every column bound to a weight variable holds only integers.
pub fn validate_instance(q: &Query, db: &Instance, order: Option<&OrderSpec>) -> Result<()> {
    for atom in &q.atoms {
        let rel = db
            .get(&atom.relation)
            .ok_or_else(|| Error::MissingRelation(atom.relation.clone()))?;
        if rel.arity() != atom.vars.len() {
            return Err(Error::ArityMismatch {
                relation: atom.relation.clone(),
                expected: atom.vars.len(),
                actual: rel.arity(),
            });
        }
    }
    let Some(order) = order.filter(|o| o.kind == OrderKind::Sum) else {
        return Ok(());
    };
    for var in &order.vars {
        for atom in &q.atoms {
            let rel = &db.relations[&atom.relation];
            for (col, _) in atom.vars.iter().enumerate().filter(|(_, v)| *v == var) {
                if rel.rows.iter().any(|r| r[col].as_int().is_none()) {
                    return Err(Error::NonNumericWeightColumn {
                        relation: rel.name.clone(),
                        column: rel.columns[col].clone(),
                        variable: var.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_order, parse_query};
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_in_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "S.csv", "B,C\n1,10\n2,20\n");
        let rel = load_relation(&p, "S").unwrap();
        assert_eq!(rel, Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[2, 20]]));
    }

    #[test]
    fn crlf_and_mixed_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "A.csv", "A\r\nfoo\r\n2\r\n");
        let rel = load_relation(&p, "A").unwrap();
        assert_eq!(rel.rows, vec![vec![Value::str("foo")], vec![Value::Int(2)]]);
    }

    #[test]
    fn ragged_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "R.csv", "A,B\n1,2\n3\n");
        assert!(matches!(load_relation(&p, "R"), Err(Error::RaggedRow { line: 3, .. })));
        let p = write(dir.path(), "E.csv", "");
        assert!(matches!(load_relation(&p, "E"), Err(Error::EmptyHeader(_))));
        assert!(matches!(
            load_relation(&dir.path().join("missing.csv"), "M"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn validation() {
        let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
        let ok = Instance::new()
            .with(Relation::from_ints("R", &["A", "B"], &[&[1, 2]]))
            .with(Relation::from_ints("S", &["B", "C"], &[&[2, 3]]));
        validate_instance(&q, &ok, None).unwrap();

        let wide = ok.clone().with(Relation::from_ints("R", &["A", "B", "X"], &[]));
        assert!(matches!(
            validate_instance(&q, &wide, None),
            Err(Error::ArityMismatch { relation, .. }) if relation == "R"
        ));
        let missing = Instance::new().with(Relation::from_ints("R", &["A", "B"], &[]));
        assert!(matches!(
            validate_instance(&q, &missing, None),
            Err(Error::MissingRelation(_))
        ));

        let strs = ok.clone().with(
            Relation::new(
                "R",
                vec!["A".into(), "B".into()],
                vec![vec![Value::str("x"), Value::Int(2)]],
            )
            .unwrap(),
        );
        let sum_a = parse_order("sum: A", &q).unwrap();
        assert!(matches!(
            validate_instance(&q, &strs, Some(&sum_a)),
            Err(Error::NonNumericWeightColumn { .. })
        ));
        validate_instance(&q, &strs, Some(&parse_order("lex: A", &q).unwrap())).unwrap();
        validate_instance(&q, &strs, Some(&parse_order("sum: C", &q).unwrap())).unwrap();
    }
}
