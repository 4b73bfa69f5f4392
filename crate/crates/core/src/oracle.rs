//! Brute-force reference evaluator for window specs.
//!
//! Ground truth for every engine test: deliberately slow and definitional,
//! sharing no partitioning, sorting, frame or tree code with the engine.
//! Groups are found by linear key comparison, frames by a per-row linear
//! membership scan, aggregates by a left-to-right fold, ranks by quadratic
//! counting.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::value::{Value, ValueType};
use crate::window::{validate_spec, FrameBound, FrameMode, FuncKind, SortDirection, WindowSpec};

/// Oracle output: one (pass-through, appended) pair per input row, emitted
/// group by group with rows in sorted order.
pub struct OracleResult {
    pub rows: Vec<(Vec<Value>, Vec<Value>)>,
}

impl OracleResult {
    /// Rows flattened to pass-through followed by appended values.
    pub fn flat_rows(&self) -> Vec<Vec<Value>> {
        self.rows
            .iter()
            .map(|(pass, appended)| {
                let mut row = pass.clone();
                row.extend(appended.iter().cloned());
                row
            })
            .collect()
    }
}

/// Evaluate `spec` over in-memory rows with the stated schema, appending one
/// value per window function and carrying `pass_through` attributes along.
pub fn oracle_evaluate<S: AsRef<str>>(
    rows: &[Vec<Value>],
    schema: &[(String, ValueType)],
    spec: &WindowSpec,
    pass_through: &[S],
) -> Result<OracleResult> {
    let lookup = |name: &str| schema.iter().find(|(n, _)| n == name).map(|(_, t)| *t);
    validate_spec(spec, lookup)?;
    let col = |name: &str| -> Result<usize> {
        schema
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    };
    let key_cols: Vec<usize> = spec
        .partition_keys
        .iter()
        .map(|k| col(k))
        .collect::<Result<_>>()?;
    let order_cols: Vec<(usize, SortDirection)> = spec
        .order_keys
        .iter()
        .map(|(k, d)| col(k).map(|i| (i, *d)))
        .collect::<Result<_>>()?;
    let pass_cols: Vec<usize> = pass_through
        .iter()
        .map(|p| col(p.as_ref()))
        .collect::<Result<_>>()?;

    // Group by key equality, first-seen order, linear key comparison.
    let mut groups: Vec<(Vec<Value>, Vec<usize>)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let key: Vec<Value> = key_cols.iter().map(|&c| row[c].clone()).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }

    let order_tuple = |i: usize| -> Vec<Value> {
        order_cols
            .iter()
            .map(|(c, _)| rows[i][*c].clone())
            .collect()
    };
    let order_cmp = |a: usize, b: usize| -> Ordering {
        for (c, dir) in &order_cols {
            let ord = rows[a][*c].total_cmp(&rows[b][*c]);
            let ord = match dir {
                SortDirection::Asc => ord,
                SortDirection::Desc => ord.reverse(),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    };

    let mut out = Vec::with_capacity(rows.len());
    for (_, mut members) in groups {
        // Stable sort keeps arrival order among peers.
        members.sort_by(|&a, &b| order_cmp(a, b));
        let n = members.len();
        for (pos, &row_idx) in members.iter().enumerate() {
            let mut appended = Vec::with_capacity(spec.functions.len());
            for f in &spec.functions {
                let value = match f.kind {
                    FuncKind::Sum | FuncKind::Min | FuncKind::Max | FuncKind::Count => {
                        let frame = spec.frame.as_ref().expect("validated");
                        let attr_col = match f.kind {
                            FuncKind::Count => None,
                            _ => Some(col(f.attr.as_deref().expect("validated"))?),
                        };
                        let in_frame: Vec<usize> = (0..n)
                            .filter(|&j| frame_contains(frame, rows, &members, &order_cols, pos, j))
                            .collect();
                        fold(f.kind, attr_col, rows, &members, &in_frame, schema)
                    }
                    FuncKind::RowNumber => Value::Int64(pos as i64 + 1),
                    FuncKind::Rank => {
                        let before = (0..n)
                            .filter(|&j| order_cmp(members[j], row_idx) == Ordering::Less)
                            .count();
                        Value::Int64(before as i64 + 1)
                    }
                    FuncKind::DenseRank => {
                        let mut distinct: Vec<Vec<Value>> = Vec::new();
                        for j in 0..n {
                            if order_cmp(members[j], row_idx) == Ordering::Less {
                                let t = order_tuple(members[j]);
                                if !distinct.contains(&t) {
                                    distinct.push(t);
                                }
                            }
                        }
                        Value::Int64(distinct.len() as i64 + 1)
                    }
                };
                appended.push(value);
            }
            let pass: Vec<Value> = pass_cols
                .iter()
                .map(|&c| rows[row_idx][c].clone())
                .collect();
            out.push((pass, appended));
        }
    }
    Ok(OracleResult { rows: out })
}

/// Definitional frame membership of sorted-group row `j` relative to the
/// current row `pos`: index distance for ROWS, ordering-value interval
/// [current − offset1, current + offset2] for RANGE.
fn frame_contains(
    frame: &crate::window::FrameSpec,
    rows: &[Vec<Value>],
    members: &[usize],
    order_cols: &[(usize, SortDirection)],
    pos: usize,
    j: usize,
) -> bool {
    match frame.mode {
        FrameMode::Rows => {
            let lo_ok = match &frame.start {
                FrameBound::UnboundedPreceding => true,
                FrameBound::Preceding(off) => {
                    j as i64 >= pos as i64 - off.as_i64().expect("validated")
                }
                FrameBound::CurrentRow => j >= pos,
                _ => unreachable!(),
            };
            let hi_ok = match &frame.end {
                FrameBound::UnboundedFollowing => true,
                FrameBound::Following(off) => {
                    j as i64 <= pos as i64 + off.as_i64().expect("validated")
                }
                FrameBound::CurrentRow => j <= pos,
                _ => unreachable!(),
            };
            lo_ok && hi_ok
        }
        FrameMode::Range => {
            let order_col = order_cols[0].0;
            let current = &rows[members[pos]][order_col];
            let candidate = &rows[members[j]][order_col];
            let lo_ok = match &frame.start {
                FrameBound::UnboundedPreceding => true,
                FrameBound::CurrentRow => candidate.total_cmp(current) != Ordering::Less,
                FrameBound::Preceding(off) => {
                    let lo = value_minus(current, off);
                    candidate.total_cmp(&lo) != Ordering::Less
                }
                _ => unreachable!(),
            };
            let hi_ok = match &frame.end {
                FrameBound::UnboundedFollowing => true,
                FrameBound::CurrentRow => candidate.total_cmp(current) != Ordering::Greater,
                FrameBound::Following(off) => {
                    let hi = value_plus(current, off);
                    candidate.total_cmp(&hi) != Ordering::Greater
                }
                _ => unreachable!(),
            };
            lo_ok && hi_ok
        }
    }
}

fn value_minus(v: &Value, off: &Value) -> Value {
    match (v, off) {
        (Value::Int64(a), Value::Int64(b)) => Value::Int64(a.saturating_sub(*b)),
        (Value::Float64(a), Value::Float64(b)) => Value::Float64(a - b),
        _ => panic!("validated offset types"),
    }
}

fn value_plus(v: &Value, off: &Value) -> Value {
    match (v, off) {
        (Value::Int64(a), Value::Int64(b)) => Value::Int64(a.saturating_add(*b)),
        (Value::Float64(a), Value::Float64(b)) => Value::Float64(a + b),
        _ => panic!("validated offset types"),
    }
}

/// Left-to-right fold over the qualifying rows; fixes the float reference
/// order the engine is compared against.
fn fold(
    kind: FuncKind,
    attr_col: Option<usize>,
    rows: &[Vec<Value>],
    members: &[usize],
    in_frame: &[usize],
    schema: &[(String, ValueType)],
) -> Value {
    match kind {
        FuncKind::Count => Value::Int64(in_frame.len() as i64),
        FuncKind::Sum => {
            let c = attr_col.unwrap();
            match schema[c].1 {
                ValueType::Int64 => {
                    let mut acc = 0i64;
                    for &j in in_frame {
                        acc += rows[members[j]][c].as_i64().unwrap();
                    }
                    Value::Int64(acc)
                }
                ValueType::Float64 => {
                    let mut acc = 0.0f64;
                    for &j in in_frame {
                        acc += rows[members[j]][c].as_f64().unwrap();
                    }
                    Value::Float64(acc)
                }
                ValueType::FixedText(_) => unreachable!("validated"),
            }
        }
        FuncKind::Min | FuncKind::Max => {
            let c = attr_col.unwrap();
            let mut best: Option<Value> = None;
            for &j in in_frame {
                let v = &rows[members[j]][c];
                best = Some(match best {
                    None => v.clone(),
                    Some(b) => {
                        let take = match kind {
                            FuncKind::Min => v.total_cmp(&b) == Ordering::Less,
                            _ => v.total_cmp(&b) == Ordering::Greater,
                        };
                        if take {
                            v.clone()
                        } else {
                            b
                        }
                    }
                });
            }
            best.unwrap_or_else(|| identity_for(kind, &schema[c].1))
        }
        _ => unreachable!("framed kinds only"),
    }
}

fn identity_for(kind: FuncKind, ty: &ValueType) -> Value {
    match kind {
        FuncKind::Min => crate::window::type_max(ty),
        FuncKind::Max => crate::window::type_min(ty),
        _ => unreachable!(),
    }
}

/// Compare engine rows against oracle rows as multisets: both sides are
/// canonically sorted, then matched pairwise, exact for everything except
/// Float64 values which must agree within `rtol` relative error.
pub fn results_match(
    engine: &[Vec<Value>],
    oracle: &[Vec<Value>],
    rtol: f64,
) -> std::result::Result<(), String> {
    if engine.len() != oracle.len() {
        return Err(format!(
            "row count mismatch: engine {} vs oracle {}",
            engine.len(),
            oracle.len()
        ));
    }
    let canon = |rows: &[Vec<Value>]| {
        let mut sorted: Vec<Vec<Value>> = rows.to_vec();
        sorted.sort_by(|a, b| {
            for (x, y) in a.iter().zip(b.iter()) {
                let ord = x.total_cmp(y);
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        });
        sorted
    };
    let engine = canon(engine);
    let oracle = canon(oracle);
    for (i, (e, o)) in engine.iter().zip(oracle.iter()).enumerate() {
        if e.len() != o.len() {
            return Err(format!("row {i}: arity mismatch"));
        }
        for (c, (ev, ov)) in e.iter().zip(o.iter()).enumerate() {
            let ok = match (ev, ov) {
                (Value::Float64(a), Value::Float64(b)) => {
                    a == b || (a - b).abs() <= rtol * a.abs().max(b.abs())
                }
                _ => ev == ov,
            };
            if !ok {
                return Err(format!("row {i} column {c}: engine {ev} vs oracle {ov}"));
            }
        }
    }
    Ok(())
}
