//! Literal attribute values and their type tags.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Type tag of an attribute placeholder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Real,
    Integer,
    Boolean,
    Text,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueType::Real => "real",
            ValueType::Integer => "integer",
            ValueType::Boolean => "boolean",
            ValueType::Text => "text",
        };
        f.write_str(s)
    }
}

/// A literal attribute value.
///
/// Encoded in JSON as a bare number, boolean or string. Reading a JSON value
/// back needs the expected [`ValueType`] to tell `3` (integer) from `3.0`
/// (real), see [`Value::from_json`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Boolean(bool),
    Integer(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Real(_) => ValueType::Real,
            Value::Integer(_) => ValueType::Integer,
            Value::Boolean(_) => ValueType::Boolean,
            Value::Text(_) => ValueType::Text,
        }
    }

    /// Converts a JSON value into a literal of the expected type. Integers are
    /// accepted where reals are expected.
    pub fn from_json(json: &serde_json::Value, expected: ValueType) -> Option<Value> {
        use serde_json::Value as J;
        match (expected, json) {
            (ValueType::Boolean, J::Bool(b)) => Some(Value::Boolean(*b)),
            (ValueType::Integer, J::Number(n)) => n.as_i64().map(Value::Integer),
            (ValueType::Real, J::Number(n)) => n.as_f64().map(Value::Real),
            (ValueType::Text, J::String(s)) => Some(Value::Text(s.clone())),
            _ => None,
        }
    }

    /// Widens an integer literal to a real when a real is expected; every other
    /// combination is returned unchanged.
    pub(crate) fn coerce(self, expected: ValueType) -> Value {
        match (expected, self) {
            (ValueType::Real, Value::Integer(i)) => Value::Real(i as f64),
            (_, v) => v,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Real(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Integer(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Boolean(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Integer(i)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}
