//! Scalar values and their fixed-width physical types.
//!
//! Every column, tuple slot and monoid element in the engine is a [`Value`].
//! Types are fixed-width and null-free, so the byte width of any attribute
//! set is a constant known from the schema alone.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical type of a column. Widths are fixed per type: 8, 8, or the
/// declared text width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueType {
    Int64,
    Float64,
    /// Fixed-width byte string, width in 1..=255. Values shorter than the
    /// width are stored zero-padded on disk and trimmed in memory.
    FixedText(u8),
}

impl ValueType {
    /// On-disk (and accounted in-memory) width of one value, in bytes.
    pub fn byte_width(&self) -> usize {
        match self {
            ValueType::Int64 | ValueType::Float64 => 8,
            ValueType::FixedText(w) => *w as usize,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ValueType::Int64 | ValueType::Float64)
    }

    pub fn validate(&self) -> Result<()> {
        if let ValueType::FixedText(0) = self {
            return Err(Error::Schema("fixed text width must be in 1..=255".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Int64 => write!(f, "int64"),
            ValueType::Float64 => write!(f, "float64"),
            ValueType::FixedText(w) => write!(f, "fixedtext({w})"),
        }
    }
}

impl std::str::FromStr for ValueType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int64" => Ok(ValueType::Int64),
            "float64" => Ok(ValueType::Float64),
            _ => {
                if let Some(inner) = s
                    .strip_prefix("fixedtext(")
                    .and_then(|r| r.strip_suffix(')'))
                {
                    let w: u16 = inner
                        .parse()
                        .map_err(|_| Error::Schema(format!("bad fixedtext width in `{s}`")))?;
                    if w == 0 || w > 255 {
                        return Err(Error::Schema(format!("fixedtext width {w} out of 1..=255")));
                    }
                    return Ok(ValueType::FixedText(w as u8));
                }
                Err(Error::Schema(format!("unknown value type `{s}`")))
            }
        }
    }
}

/// One scalar. Text carries raw bytes (trailing zero padding already
/// stripped); equality and ordering for floats use the IEEE total order so
/// values can serve as hash keys and sort keys.
#[derive(Debug, Clone)]
pub enum Value {
    Int64(i64),
    Float64(f64),
    Text(Vec<u8>),
}

impl Value {
    pub fn text(s: &str) -> Value {
        Value::Text(s.as_bytes().to_vec())
    }

    pub fn value_type_of(&self, text_width: u8) -> ValueType {
        match self {
            Value::Int64(_) => ValueType::Int64,
            Value::Float64(_) => ValueType::Float64,
            Value::Text(_) => ValueType::FixedText(text_width),
        }
    }

    pub fn matches_type(&self, ty: &ValueType) -> bool {
        match (self, ty) {
            (Value::Int64(_), ValueType::Int64) => true,
            (Value::Float64(_), ValueType::Float64) => true,
            (Value::Text(b), ValueType::FixedText(w)) => b.len() <= *w as usize,
            _ => false,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int64(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float64(v) => Some(*v),
            _ => None,
        }
    }

    /// Total order across values of the same type; mismatched types order by
    /// a fixed type tag so the order stays total for canonical row sorting.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Int64(a), Value::Int64(b)) => a.cmp(b),
            (Value::Float64(a), Value::Float64(b)) => a.total_cmp(b),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => self.type_tag().cmp(&other.type_tag()),
        }
    }

    fn type_tag(&self) -> u8 {
        match self {
            Value::Int64(_) => 0,
            Value::Float64(_) => 1,
            Value::Text(_) => 2,
        }
    }

    /// Parse from CSV text according to the declared column type.
    pub fn parse(ty: &ValueType, field: &str) -> Result<Value> {
        match ty {
            ValueType::Int64 => field
                .trim()
                .parse::<i64>()
                .map(Value::Int64)
                .map_err(|_| Error::Parse(format!("`{field}` is not a valid int64"))),
            ValueType::Float64 => field
                .trim()
                .parse::<f64>()
                .map(Value::Float64)
                .map_err(|_| Error::Parse(format!("`{field}` is not a valid float64"))),
            ValueType::FixedText(w) => {
                if field.len() > *w as usize {
                    Err(Error::Parse(format!(
                        "text `{field}` exceeds fixed width {w}"
                    )))
                } else {
                    Ok(Value::Text(field.as_bytes().to_vec()))
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int64(v) => write!(f, "{v}"),
            Value::Float64(v) => write!(f, "{v}"),
            Value::Text(b) => write!(f, "{}", String::from_utf8_lossy(b)),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Int64(v) => {
                0u8.hash(state);
                v.hash(state);
            }
            Value::Float64(v) => {
                1u8.hash(state);
                v.to_bits().hash(state);
            }
            Value::Text(b) => {
                2u8.hash(state);
                b.hash(state);
            }
        }
    }
}

/// A materialized row fragment: one value per requested attribute.
pub type Tuple = Vec<Value>;

/// Typed column buffer. Group payloads, read buffers and tuple blocks all
/// hold values in this packed form; `Value`s are only built at the edges.
#[derive(Debug, Clone)]
pub enum ColumnData {
    Int64(Vec<i64>),
    Float64(Vec<f64>),
    /// Packed fixed-width bytes, `width` per row, zero-padded.
    Text {
        width: u8,
        bytes: Vec<u8>,
    },
}

impl ColumnData {
    pub fn with_capacity(ty: &ValueType, rows: usize) -> ColumnData {
        match ty {
            ValueType::Int64 => ColumnData::Int64(Vec::with_capacity(rows)),
            ValueType::Float64 => ColumnData::Float64(Vec::with_capacity(rows)),
            ValueType::FixedText(w) => ColumnData::Text {
                width: *w,
                bytes: Vec::with_capacity(rows * *w as usize),
            },
        }
    }

    pub fn value_type(&self) -> ValueType {
        match self {
            ColumnData::Int64(_) => ValueType::Int64,
            ColumnData::Float64(_) => ValueType::Float64,
            ColumnData::Text { width, .. } => ValueType::FixedText(*width),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int64(v) => v.len(),
            ColumnData::Float64(v) => v.len(),
            ColumnData::Text { width, bytes } => bytes.len() / *width as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Logical byte size (row count times fixed width).
    pub fn byte_size(&self) -> u64 {
        (self.len() * self.value_type().byte_width()) as u64
    }

    pub fn push_value(&mut self, v: &Value) {
        match (self, v) {
            (ColumnData::Int64(col), Value::Int64(x)) => col.push(*x),
            (ColumnData::Float64(col), Value::Float64(x)) => col.push(*x),
            (ColumnData::Text { width, bytes }, Value::Text(b)) => {
                debug_assert!(b.len() <= *width as usize);
                bytes.extend_from_slice(b);
                bytes.resize(bytes.len() + *width as usize - b.len(), 0);
            }
            _ => panic!("value type does not match column type"),
        }
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            ColumnData::Int64(v) => Value::Int64(v[row]),
            ColumnData::Float64(v) => Value::Float64(v[row]),
            ColumnData::Text { width, bytes } => {
                let w = *width as usize;
                let raw = &bytes[row * w..(row + 1) * w];
                Value::Text(trim_padding(raw).to_vec())
            }
        }
    }

    /// Raw padded bytes of one text row; panics for numeric columns.
    pub fn text_raw(&self, row: usize) -> &[u8] {
        match self {
            ColumnData::Text { width, bytes } => {
                let w = *width as usize;
                &bytes[row * w..(row + 1) * w]
            }
            _ => panic!("text_raw on numeric column"),
        }
    }

    /// Append row `row` of `src` (same type) to self.
    pub fn push_from(&mut self, src: &ColumnData, row: usize) {
        match (self, src) {
            (ColumnData::Int64(dst), ColumnData::Int64(s)) => dst.push(s[row]),
            (ColumnData::Float64(dst), ColumnData::Float64(s)) => dst.push(s[row]),
            (ColumnData::Text { bytes, width }, src @ ColumnData::Text { .. }) => {
                debug_assert_eq!(
                    *width,
                    match src {
                        ColumnData::Text { width, .. } => *width,
                        _ => unreachable!(),
                    }
                );
                bytes.extend_from_slice(src.text_raw(row));
            }
            _ => panic!("column type mismatch in push_from"),
        }
    }

    /// Compare row `row` against a scalar of the matching type.
    pub fn cmp_value(&self, row: usize, v: &Value) -> Ordering {
        match (self, v) {
            (ColumnData::Int64(col), Value::Int64(b)) => col[row].cmp(b),
            (ColumnData::Float64(col), Value::Float64(b)) => col[row].total_cmp(b),
            (ColumnData::Text { .. }, Value::Text(b)) => {
                trim_padding(self.text_raw(row)).cmp(b.as_slice())
            }
            _ => panic!("column type mismatch in cmp_value"),
        }
    }

    /// Compare two rows, possibly across two buffers of the same type.
    pub fn cmp_rows(&self, row: usize, other: &ColumnData, other_row: usize) -> Ordering {
        match (self, other) {
            (ColumnData::Int64(a), ColumnData::Int64(b)) => a[row].cmp(&b[other_row]),
            (ColumnData::Float64(a), ColumnData::Float64(b)) => a[row].total_cmp(&b[other_row]),
            (ColumnData::Text { .. }, ColumnData::Text { .. }) => {
                self.text_raw(row).cmp(other.text_raw(other_row))
            }
            _ => panic!("column type mismatch in cmp_rows"),
        }
    }

    /// Reorder rows so output row i is input row `perm[i]`.
    pub fn permute(&self, perm: &[u32]) -> ColumnData {
        match self {
            ColumnData::Int64(v) => {
                ColumnData::Int64(perm.iter().map(|&i| v[i as usize]).collect())
            }
            ColumnData::Float64(v) => {
                ColumnData::Float64(perm.iter().map(|&i| v[i as usize]).collect())
            }
            ColumnData::Text { width, .. } => {
                let w = *width as usize;
                let mut bytes = Vec::with_capacity(perm.len() * w);
                for &i in perm {
                    bytes.extend_from_slice(self.text_raw(i as usize));
                }
                ColumnData::Text {
                    width: *width,
                    bytes,
                }
            }
        }
    }

    /// Append the padded fixed-width encoding of row `row` to `out`.
    pub fn encode_row_into(&self, row: usize, out: &mut Vec<u8>) {
        match self {
            ColumnData::Int64(v) => out.extend_from_slice(&v[row].to_le_bytes()),
            ColumnData::Float64(v) => out.extend_from_slice(&v[row].to_le_bytes()),
            ColumnData::Text { .. } => out.extend_from_slice(self.text_raw(row)),
        }
    }
}

/// Strip trailing zero padding from a fixed-width text cell.
pub fn trim_padding(raw: &[u8]) -> &[u8] {
    let end = raw.iter().rposition(|&b| b != 0).map_or(0, |p| p + 1);
    &raw[..end]
}

/// Decode one fixed-width cell from `bytes` at `offset`.
pub fn decode_value(ty: &ValueType, bytes: &[u8], offset: usize) -> Value {
    match ty {
        ValueType::Int64 => {
            let mut b = [0u8; 8];
            b.copy_from_slice(&bytes[offset..offset + 8]);
            Value::Int64(i64::from_le_bytes(b))
        }
        ValueType::Float64 => {
            let mut b = [0u8; 8];
            b.copy_from_slice(&bytes[offset..offset + 8]);
            Value::Float64(f64::from_le_bytes(b))
        }
        ValueType::FixedText(w) => {
            let raw = &bytes[offset..offset + *w as usize];
            Value::Text(trim_padding(raw).to_vec())
        }
    }
}

/// Append the padded fixed-width encoding of `v` to `out`.
pub fn encode_value_into(ty: &ValueType, v: &Value, out: &mut Vec<u8>) {
    match (ty, v) {
        (ValueType::Int64, Value::Int64(x)) => out.extend_from_slice(&x.to_le_bytes()),
        (ValueType::Float64, Value::Float64(x)) => out.extend_from_slice(&x.to_le_bytes()),
        (ValueType::FixedText(w), Value::Text(b)) => {
            debug_assert!(b.len() <= *w as usize);
            out.extend_from_slice(b);
            out.resize(out.len() + *w as usize - b.len(), 0);
        }
        _ => panic!("value type does not match declared type"),
    }
}
