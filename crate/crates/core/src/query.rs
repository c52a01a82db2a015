//! Conjunctive queries and order specifications.
//!
//! Query syntax: `Q(A,B,C) :- R(A,B), S(B,C).` with identifiers matching
//! `[A-Za-z_][A-Za-z0-9_]*`. Order syntax: `lex: A,B` or `sum: A,C`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on distinct variables per query; variable sets are `u64` bitmasks.
pub const MAX_VARIABLES: usize = 64;

/// Dense variable identifier. Head variables take ids `0..head.len()` in head
/// order; existential variables follow in order of first appearance.
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub relation: String,
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub name: String,
    pub head: Vec<String>,
    pub atoms: Vec<Atom>,
    variables: Vec<String>,
}

impl Query {
    pub fn new(name: impl Into<String>, head: Vec<String>, atoms: Vec<Atom>) -> Result<Query> {
        for (i, h) in head.iter().enumerate() {
            if head[..i].contains(h) {
                return Err(Error::DuplicateHeadVariable(h.clone()));
            }
        }
        for h in &head {
            if !atoms.iter().any(|a| a.vars.contains(h)) {
                return Err(Error::UnboundHeadVariable(h.clone()));
            }
        }
        let mut variables = head.clone();
        for atom in &atoms {
            for v in &atom.vars {
                if !variables.contains(v) {
                    variables.push(v.clone());
                }
            }
        }
        if variables.len() > MAX_VARIABLES {
            return Err(Error::TooManyVariables { max: MAX_VARIABLES });
        }
        Ok(Query {
            name: name.into(),
            head,
            atoms,
            variables,
        })
    }

    /// All variables, indexed by [`VarId`].
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn head_len(&self) -> usize {
        self.head.len()
    }

    pub fn is_head(&self, v: VarId) -> bool {
        v < self.head.len()
    }

    pub fn is_full(&self) -> bool {
        self.variables.len() == self.head.len()
    }

    /// Variable ids of an atom in position order (repeats preserved).
    pub fn atom_var_ids(&self, atom: usize) -> Vec<VarId> {
        self.atoms[atom]
            .vars
            .iter()
            .map(|v| self.var_id(v).expect("atom variables are interned"))
            .collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.vars.join(","))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) :- ", self.name, self.head.join(","))?;
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{atom}")?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderKind {
    Lex,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSpec {
    pub kind: OrderKind,
    pub vars: Vec<String>,
}

impl OrderSpec {
    pub fn lex<S: AsRef<str>>(vars: &[S]) -> OrderSpec {
        OrderSpec {
            kind: OrderKind::Lex,
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
        }
    }

    pub fn sum<S: AsRef<str>>(vars: &[S]) -> OrderSpec {
        OrderSpec {
            kind: OrderKind::Sum,
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
        }
    }

    /// A lex order ranking every head variable.
    pub fn is_full(&self, q: &Query) -> bool {
        self.kind == OrderKind::Lex && self.vars.len() == q.head.len()
    }

    /// Checks the order against `q`: every variable is a head variable, no repeats.
    pub fn validate(&self, q: &Query) -> Result<()> {
        for (i, v) in self.vars.iter().enumerate() {
            match q.var_id(v) {
                None => return Err(Error::UnknownVariable(v.clone())),
                Some(id) if !q.is_head(id) => return Err(Error::NonFreeVariable(v.clone())),
                Some(_) => {}
            }
            if self.vars[..i].contains(v) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        Ok(())
    }

    /// Head variable ids of the order, in order.
    pub fn var_ids(&self, q: &Query) -> Vec<VarId> {
        self.vars
            .iter()
            .map(|v| q.var_id(v).expect("validated order"))
            .collect()
    }
}

impl fmt::Display for OrderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            OrderKind::Lex => "lex",
            OrderKind::Sum => "sum",
        };
        write!(f, "{kind}: {}", self.vars.join(","))
    }
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn err<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos,
            expected: expected.to_string(),
        })
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            self.err(&format!("'{token}'"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        match bytes.get(start) {
            Some(b) if b.is_ascii_alphabetic() || *b == b'_' => {}
            _ => return self.err("identifier"),
        }
        let mut end = start + 1;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        self.pos = end;
        Ok(self.src[start..end].to_string())
    }

    /// `( ident , ident ... )`; empty lists allowed when `allow_empty`.
    fn ident_list(&mut self, allow_empty: bool) -> Result<Vec<String>> {
        self.expect("(")?;
        let mut out = Vec::new();
        if allow_empty && self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(')') {
                return Ok(out);
            }
            if !self.eat(',') {
                return self.err("',' or ')'");
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }
}

pub fn parse_query(text: &str) -> Result<Query> {
    let mut s = Scanner::new(text);
    let name = s.ident()?;
    let head = s.ident_list(true)?;
    s.expect(":-")?;
    let mut atoms = Vec::new();
    loop {
        let relation = s.ident()?;
        let vars = s.ident_list(false)?;
        atoms.push(Atom { relation, vars });
        if s.eat('.') {
            break;
        }
        if !s.eat(',') {
            return s.err("',' or '.'");
        }
    }
    if !s.at_end() {
        return s.err("end of input");
    }
    Query::new(name, head, atoms)
}

pub fn parse_order(text: &str, q: &Query) -> Result<OrderSpec> {
    let mut s = Scanner::new(text);
    let kind = match s.ident()?.as_str() {
        "lex" => OrderKind::Lex,
        "sum" => OrderKind::Sum,
        _ => {
            return Err(Error::Syntax {
                position: 0,
                expected: "'lex' or 'sum'".into(),
            })
        }
    };
    s.expect(":")?;
    let mut vars = vec![s.ident()?];
    while s.eat(',') {
        vars.push(s.ident()?);
    }
    if !s.at_end() {
        return s.err("',' or end of input");
    }
    let order = OrderSpec { kind, vars };
    order.validate(q)?;
    Ok(order)
}
