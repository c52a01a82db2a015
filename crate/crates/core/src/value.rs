use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// A single attribute value.
///
/// Values are totally ordered: every `Int` sorts before every `Str`, integers
/// compare numerically and strings compare by raw bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Str(Arc<str>),
}

impl Value {
    /// Parses a CSV cell: integer literals become `Int`, anything else `Str`.
    pub fn parse_cell(cell: &str) -> Value {
        match cell.parse::<i64>() {
            Ok(i) => Value::Int(i),
            Err(_) => Value::Str(Arc::from(cell)),
        }
    }

    pub fn str(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Str(_) => None,
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::str(s)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(i) => serializer.serialize_i64(*i),
            Value::Str(s) => serializer.serialize_str(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn value() -> impl Strategy<Value = Value> {
        prop_oneof![
            any::<i64>().prop_map(Value::Int),
            "[a-c0-9]{0,3}".prop_map(|s| Value::str(&s)),
        ]
    }

    #[test]
    fn ints_sort_before_strings() {
        assert!(Value::Int(i64::MAX) < Value::str(""));
        assert!(Value::Int(-3) < Value::Int(2));
        assert!(Value::str("B") < Value::str("a"));
    }

    #[test]
    fn cell_parsing() {
        assert_eq!(Value::parse_cell("42"), Value::Int(42));
        assert_eq!(Value::parse_cell("-7"), Value::Int(-7));
        assert_eq!(Value::parse_cell("foo"), Value::str("foo"));
        assert_eq!(Value::parse_cell("1.5"), Value::str("1.5"));
        assert_eq!(Value::parse_cell(""), Value::str(""));
    }

    proptest! {
        #[test]
        fn order_is_total_and_antisymmetric(a in value(), b in value()) {
            let ab = a.cmp(&b);
            prop_assert_eq!(ab, b.cmp(&a).reverse());
            prop_assert_eq!(ab == std::cmp::Ordering::Equal, a == b);
        }

        #[test]
        fn order_is_transitive(a in value(), b in value(), c in value()) {
            if a <= b && b <= c {
                prop_assert!(a <= c);
            }
        }
    }
}
