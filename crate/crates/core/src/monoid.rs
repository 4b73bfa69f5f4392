//! Monoids over scalar tuples.
//!
//! A segment tree reorders the sequence of combine operations, so every
//! aggregate it hosts must form a monoid: an associative binary operation
//! with an identity element. Identities follow the usual convention: 0 for
//! SUM and COUNT, the type maximum for MIN (standing in for +∞) and the type
//! minimum for MAX (−∞). Several monoids compose into a product monoid that
//! works componentwise on tuples, which is how several window functions over
//! one frame are evaluated in a single pass.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::value::{Tuple, Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoidKind {
    SumI64,
    SumF64,
    Min,
    Max,
    /// Sum of per-leaf ones; leaves carry `Int64(1)`.
    Count,
}

impl MonoidKind {
    pub fn name(&self) -> &'static str {
        match self {
            MonoidKind::SumI64 => "sum_i64",
            MonoidKind::SumF64 => "sum_f64",
            MonoidKind::Min => "min",
            MonoidKind::Max => "max",
            MonoidKind::Count => "count",
        }
    }
}

/// One component of a (product) monoid: an operation over one value type.
#[derive(Debug, Clone, Copy)]
pub struct MonoidPart {
    pub kind: MonoidKind,
    pub value_type: ValueType,
}

impl MonoidPart {
    pub fn identity(&self) -> Value {
        match self.kind {
            MonoidKind::SumI64 | MonoidKind::Count => Value::Int64(0),
            MonoidKind::SumF64 => Value::Float64(0.0),
            MonoidKind::Min => match self.value_type {
                ValueType::Int64 => Value::Int64(i64::MAX),
                ValueType::Float64 => Value::Float64(f64::INFINITY),
                ValueType::FixedText(w) => Value::Text(vec![0xFF; w as usize]),
            },
            MonoidKind::Max => match self.value_type {
                ValueType::Int64 => Value::Int64(i64::MIN),
                ValueType::Float64 => Value::Float64(f64::NEG_INFINITY),
                ValueType::FixedText(_) => Value::Text(Vec::new()),
            },
        }
    }

    /// acc ← op(acc, rhs); left argument stays on the left so any
    /// non-commutative future monoid keeps leaf order.
    pub fn combine_assign(&self, acc: &mut Value, rhs: &Value) {
        match self.kind {
            MonoidKind::SumI64 | MonoidKind::Count => match (acc, rhs) {
                (Value::Int64(a), Value::Int64(b)) => *a += *b,
                _ => panic!("sum_i64 over non-int values"),
            },
            MonoidKind::SumF64 => match (acc, rhs) {
                (Value::Float64(a), Value::Float64(b)) => *a += *b,
                _ => panic!("sum_f64 over non-float values"),
            },
            MonoidKind::Min => {
                if rhs.total_cmp(acc) == Ordering::Less {
                    *acc = rhs.clone();
                }
            }
            MonoidKind::Max => {
                if rhs.total_cmp(acc) == Ordering::Greater {
                    *acc = rhs.clone();
                }
            }
        }
    }
}

/// A monoid over `arity`-wide value tuples. Built by [`make_monoid`] for a
/// single aggregate and widened by [`compose`] into products.
#[derive(Debug, Clone)]
pub struct Monoid {
    parts: Vec<MonoidPart>,
    name: String,
}

/// Single-component monoid for one aggregate kind over one value type.
pub fn make_monoid(kind: MonoidKind, value_type: ValueType) -> Result<Monoid> {
    match kind {
        MonoidKind::SumI64 if value_type != ValueType::Int64 => {
            return Err(Error::InvalidMonoid(format!(
                "sum_i64 requires int64, got {value_type}"
            )));
        }
        MonoidKind::SumF64 if value_type != ValueType::Float64 => {
            return Err(Error::InvalidMonoid(format!(
                "sum_f64 requires float64, got {value_type}"
            )));
        }
        MonoidKind::Count if value_type != ValueType::Int64 => {
            return Err(Error::InvalidMonoid("count leaves are int64 ones".into()));
        }
        _ => {}
    }
    Ok(Monoid {
        parts: vec![MonoidPart { kind, value_type }],
        name: kind.name().to_string(),
    })
}

/// Product monoid: identity is the tuple of identities, the operation is
/// componentwise.
pub fn compose(monoids: &[Monoid]) -> Result<Monoid> {
    if monoids.is_empty() {
        return Err(Error::InvalidMonoid("compose requires ≥1 monoid".into()));
    }
    let mut parts = Vec::new();
    let mut names = Vec::new();
    for m in monoids {
        parts.extend(m.parts.iter().copied());
        names.push(m.name.clone());
    }
    Ok(Monoid {
        parts,
        name: names.join("*"),
    })
}

impl Monoid {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[MonoidPart] {
        &self.parts
    }

    pub fn identity(&self) -> Tuple {
        self.parts.iter().map(|p| p.identity()).collect()
    }

    /// acc ← op(acc, rhs), componentwise. `rhs` must have tuple arity.
    pub fn combine_into(&self, acc: &mut [Value], rhs: &[Value]) {
        debug_assert_eq!(acc.len(), self.parts.len());
        debug_assert_eq!(rhs.len(), self.parts.len());
        for (i, part) in self.parts.iter().enumerate() {
            part.combine_assign(&mut acc[i], &rhs[i]);
        }
    }

    pub fn combine(&self, a: &[Value], b: &[Value]) -> Tuple {
        let mut acc = a.to_vec();
        self.combine_into(&mut acc, b);
        acc
    }
}
