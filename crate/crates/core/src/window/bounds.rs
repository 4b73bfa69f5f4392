//! Frame bound computation for ordered groups.
//!
//! ROWS bounds are index arithmetic clamped to the group; RANGE bounds are
//! found by binary search over the (ascending) first ORDER BY column. RANGE
//! frames select by value, so rows equal to the current value (peers) always
//! fall inside a CURRENT ROW bounded frame.

use crate::value::{ColumnData, Value, ValueType};

use super::spec::{FrameBound, FrameMode, FrameSpec};

/// Inclusive (start, end) row indexes of the frame of `row` within a group
/// of `len` rows. `order_col` is the first ORDER BY column and is required
/// for RANGE mode. The legal bound kinds always produce a frame containing
/// the current row, so `start ≤ row ≤ end`; an empty frame would be
/// representable as `start > end`.
pub fn frame_bounds(
    frame: &FrameSpec,
    order_col: Option<&ColumnData>,
    row: usize,
    len: usize,
) -> (usize, usize) {
    debug_assert!(row < len);
    match frame.mode {
        FrameMode::Rows => rows_bounds(frame, row, len),
        FrameMode::Range => {
            let col = order_col.expect("RANGE bounds need the ordering column");
            range_bounds(frame, col, row, len)
        }
    }
}

fn rows_bounds(frame: &FrameSpec, row: usize, len: usize) -> (usize, usize) {
    let start = match &frame.start {
        FrameBound::UnboundedPreceding => 0,
        FrameBound::Preceding(off) => {
            let k = off.as_i64().expect("validated ROWS offset") as u64;
            (row as u64).saturating_sub(k) as usize
        }
        FrameBound::CurrentRow => row,
        _ => unreachable!("validated start bound"),
    };
    let end = match &frame.end {
        FrameBound::CurrentRow => row,
        FrameBound::Following(off) => {
            let k = off.as_i64().expect("validated ROWS offset") as u64;
            (row as u64).saturating_add(k).min(len as u64 - 1) as usize
        }
        FrameBound::UnboundedFollowing => len - 1,
        _ => unreachable!("validated end bound"),
    };
    (start, end)
}

fn range_bounds(frame: &FrameSpec, col: &ColumnData, row: usize, len: usize) -> (usize, usize) {
    let start = match &frame.start {
        FrameBound::UnboundedPreceding => 0,
        bound => {
            let lo = range_bound_value(col, row, bound);
            // First index with value ≥ lo.
            partition_point(len, |i| col.cmp_value(i, &lo).is_lt())
        }
    };
    let end = match &frame.end {
        FrameBound::UnboundedFollowing => len - 1,
        bound => {
            let hi = range_bound_value(col, row, bound);
            // One past the last index with value ≤ hi.
            partition_point(len, |i| col.cmp_value(i, &hi).is_le()) - 1
        }
    };
    (start, end)
}

/// The value-interval border implied by one RANGE frame bound at `row`:
/// current value ∓ offset, computed in the ordering column's type with
/// saturating integer arithmetic. Unbounded borders map to the type
/// extremes, mirroring the ±∞ identity convention.
pub fn range_bound_value(col: &ColumnData, row: usize, bound: &FrameBound) -> Value {
    match bound {
        FrameBound::UnboundedPreceding => type_min(&col.value_type()),
        FrameBound::UnboundedFollowing => type_max(&col.value_type()),
        FrameBound::CurrentRow => col.value(row),
        FrameBound::Preceding(off) => match (col, off) {
            (ColumnData::Int64(v), Value::Int64(k)) => Value::Int64(v[row].saturating_sub(*k)),
            (ColumnData::Float64(v), Value::Float64(k)) => Value::Float64(v[row] - k),
            _ => panic!("validated RANGE offset type"),
        },
        FrameBound::Following(off) => match (col, off) {
            (ColumnData::Int64(v), Value::Int64(k)) => Value::Int64(v[row].saturating_add(*k)),
            (ColumnData::Float64(v), Value::Float64(k)) => Value::Float64(v[row] + k),
            _ => panic!("validated RANGE offset type"),
        },
    }
}

pub fn type_min(ty: &ValueType) -> Value {
    match ty {
        ValueType::Int64 => Value::Int64(i64::MIN),
        ValueType::Float64 => Value::Float64(f64::NEG_INFINITY),
        ValueType::FixedText(_) => Value::Text(Vec::new()),
    }
}

pub fn type_max(ty: &ValueType) -> Value {
    match ty {
        ValueType::Int64 => Value::Int64(i64::MAX),
        ValueType::Float64 => Value::Float64(f64::INFINITY),
        ValueType::FixedText(w) => Value::Text(vec![0xFF; *w as usize]),
    }
}

/// First index in `0..len` where `pred` is false; `pred` must be monotone.
fn partition_point(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let mut lo = 0;
    let mut hi = len;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}
