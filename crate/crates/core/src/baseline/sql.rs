//! SQL text for positional access, in the OFFSET/LIMIT and ROW_NUMBER() forms.
//!
//! Columns are assumed to carry the variable names used in the query.

use std::collections::HashMap;
use std::fmt::Write;

use crate::analysis::ResolvedOrder;
use crate::error::{Error, Result};
use crate::query::{OrderKind, OrderSpec, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqlDialect {
    /// `OFFSET k LIMIT 1`; zero-based, one position per statement.
    OffsetLimit,
    /// `ROW_NUMBER()` in a CTE; one-based `row_idx`, any number of positions.
    CteRowNumber,
}

pub fn emit_sql(q: &Query, order: &OrderSpec, positions: &[u128], dialect: SqlDialect) -> Result<String> {
    order.validate(q)?;
    if dialect == SqlDialect::OffsetLimit && positions.len() != 1 {
        return Err(Error::MultiplePositionsWithOffsetDialect);
    }
    if positions.is_empty() {
        return Err(Error::Config("no positions given".into()));
    }
    let resolved = ResolvedOrder::new(q, order);
    let names = q.variables();

    let aliases = atom_aliases(q)?;
    let mut from = String::new();
    for (i, atom) in q.atoms.iter().enumerate() {
        let table = if aliases[i] == atom.relation {
            atom.relation.clone()
        } else {
            format!("{} AS {}", atom.relation, aliases[i])
        };
        if i == 0 {
            from.push_str(&table);
            continue;
        }
        let eqs: Vec<String> = atom
            .vars
            .iter()
            .filter_map(|v| {
                let earlier = q.atoms[..i].iter().position(|a| a.vars.contains(v))?;
                Some(format!("{}.{v}={}.{v}", aliases[earlier], aliases[i]))
            })
            .collect();
        if eqs.is_empty() {
            write!(from, " CROSS JOIN {table}").unwrap();
        } else {
            write!(from, " JOIN {table} ON {}", eqs.join(" AND ")).unwrap();
        }
    }

    let select = if q.is_full() && q.head_len() > 0 {
        "*".to_string()
    } else if q.head_len() == 0 {
        "1 AS one".to_string()
    } else {
        q.head
            .iter()
            .map(|v| {
                let a = q
                    .atoms
                    .iter()
                    .position(|a| a.vars.contains(v))
                    .expect("head variable occurs in an atom");
                format!("{}.{v} AS {v}", aliases[a])
            })
            .collect::<Vec<_>>()
            .join(", ")
    };

    let mut keys: Vec<String> = Vec::new();
    if resolved.kind == OrderKind::Sum {
        keys.push(
            resolved
                .weights
                .iter()
                .map(|&w| names[w].as_str())
                .collect::<Vec<_>>()
                .join("+"),
        );
    }
    keys.extend(resolved.sequence.iter().map(|&v| names[v].clone()));
    let order_by = keys.join(",");

    let mut sql = String::new();
    match dialect {
        SqlDialect::OffsetLimit => {
            writeln!(sql, "SELECT {select}").unwrap();
            writeln!(sql, "FROM {from}").unwrap();
            if !order_by.is_empty() {
                writeln!(sql, "ORDER BY {order_by}").unwrap();
            }
            writeln!(sql, "OFFSET {}", positions[0]).unwrap();
            writeln!(sql, "LIMIT 1").unwrap();
        }
        SqlDialect::CteRowNumber => {
            let over = if order_by.is_empty() {
                String::new()
            } else {
                format!("ORDER BY {order_by}")
            };
            let idx: Vec<String> = positions.iter().map(|k| (k + 1).to_string()).collect();
            writeln!(sql, "WITH ordered_result AS (").unwrap();
            writeln!(sql, "  SELECT {select},").unwrap();
            writeln!(sql, "    ROW_NUMBER() OVER ({over}) AS row_idx").unwrap();
            writeln!(sql, "  FROM {from})").unwrap();
            writeln!(sql, "SELECT * FROM ordered_result").unwrap();
            writeln!(sql, "WHERE row_idx IN ({})", idx.join(", ")).unwrap();
        }
    }
    Ok(sql)
}

/// Relation names, with `R_<i>` aliases for relations used more than once.
fn atom_aliases(q: &Query) -> Result<Vec<String>> {
    let mut uses: HashMap<&str, usize> = HashMap::new();
    for atom in &q.atoms {
        *uses.entry(atom.relation.as_str()).or_default() += 1;
        let mut vars = atom.vars.clone();
        vars.sort();
        vars.dedup();
        if vars.len() != atom.vars.len() {
            return Err(Error::NotApplicable(format!(
                "atom {} repeats a variable, which has no column-name encoding",
                atom.relation
            )));
        }
    }
    Ok(q.atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if uses[a.relation.as_str()] > 1 {
                format!("{}_{}", a.relation, i + 1)
            } else {
                a.relation.clone()
            }
        })
        .collect())
}
