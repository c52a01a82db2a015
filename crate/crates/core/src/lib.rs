//! Ranked access to the answers of conjunctive queries.
//!
//! Answers are ordered lexicographically by a list of head variables, or by
//! the sum of integer-valued head variables. For tractable query/order pairs
//! [`DirectIndex`] preprocesses the instance once and then returns the k-th
//! answer in logarithmic time; [`select_lex`] and [`select_sum`] compute a
//! single k-th answer without building an index. [`analyze`] decides which
//! of these apply, and [`baseline`] holds the sort-based reference
//! strategies used as the test oracle.
//!
//! ```
//! use cqda::{parse_query, parse_order, DirectIndex, Instance, Relation};
//!
//! let q = parse_query("Q(A,B,C) :- R(A,B), S(B,C).").unwrap();
//! let db = Instance::new()
//!     .with(Relation::from_ints("R", &["A", "B"], &[&[1, 1], &[1, 2], &[2, 1]]))
//!     .with(Relation::from_ints("S", &["B", "C"], &[&[1, 10], &[2, 20], &[2, 30]]));
//! let order = parse_order("lex: A,B,C", &q).unwrap();
//! let ix = DirectIndex::build(&q, &db, &order).unwrap();
//! assert_eq!(ix.count(), 4);
//! assert_eq!(ix.access(2).unwrap().get("C").unwrap().as_int(), Some(30));
//! ```

pub mod analysis;
pub mod baseline;
pub mod bench;
pub mod bind;
pub mod data;
pub mod engine;
pub mod error;
pub mod query;
pub mod select;
pub mod value;

pub use analysis::{analyze, Mode, ReasonCode, ResolvedOrder, TractabilityReport};
pub use bind::{AnswerTuple, Counters};
pub use data::{load_relation, validate_instance, Instance, Relation};
pub use engine::{AccessIndex, AccessStats, DirectIndex, SumAccessIndex};
pub use error::{Error, Result};
pub use query::{parse_order, parse_query, Atom, OrderKind, OrderSpec, Query};
pub use select::{select_lex, select_sum, Selection};
pub use value::Value;
