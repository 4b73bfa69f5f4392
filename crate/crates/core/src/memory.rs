//! Analytical memory-cost model for the three materialization strategies,
//! plus the instrumentation the window operator uses so predictions can be
//! compared against measured peaks.
//!
//! The model covers exactly the operator-attributed structures: hash table
//! keys, hash table data (tuples or positions), the per-group
//! materialization delta, and the on-demand frame window. Accounting counts
//! the same structures in logical fixed-width bytes; storage read buffers
//! and the cumulative MIN/MAX ordered multiset sit outside the model and are
//! not counted. Segment trees are also outside the three formulas and are
//! tracked on a separate counter, reported as their own line.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::position::PositionalOperator;
use crate::window::{frame_bounds, FrameMode, FrameSpec, Strategy, WindowSpec};

/// Symbols of the strategy cost formulas, measured or supplied directly.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MemoryModelParams {
    /// Input logical rows (N).
    pub rows: u64,
    /// Number of groups (M).
    pub groups: u64,
    /// Largest group size in rows (G^max).
    pub max_group: u64,
    /// Bytes of one materialized partition-key tuple.
    pub key_tuple_bytes: u64,
    /// Bytes of one materialized (sort ∪ aggregate) tuple.
    pub sort_aggr_tuple_bytes: u64,
    /// Bytes of one positional logical row (8 per joined table).
    pub position_row_bytes: u64,
    /// Bytes of one materialized sort-attribute tuple.
    pub sort_tuple_bytes: u64,
    /// Bytes of one materialized aggregate-attribute tuple.
    pub aggr_tuple_bytes: u64,
    /// Maximum frame size in rows.
    pub window_size: u64,
}

/// Predicted auxiliary bytes for one strategy.
///
/// - S1: keys `M·size_t(A_k)` plus hash data `N·size_t(A_sort ∪ A_aggr)`.
/// - S2a: keys, positional hash data `N·size_p`, plus the materialization
///   delta `G^max·(size_t(A_sort ∪ A_aggr) − size_p)` from building one
///   group's tuples while dropping its already-read positions.
/// - S2b: keys, positional hash data, materialized sorting attributes
///   `G^max·size_t(A_sort)`, and the frame window
///   `size_t(A_aggr)·window_size`.
pub fn estimate(strategy: Strategy, p: &MemoryModelParams) -> u64 {
    let keys = p.groups as i128 * p.key_tuple_bytes as i128;
    let total = match strategy {
        Strategy::S1 => keys + p.rows as i128 * p.sort_aggr_tuple_bytes as i128,
        Strategy::S2a => {
            keys + p.rows as i128 * p.position_row_bytes as i128
                + p.max_group as i128
                    * (p.sort_aggr_tuple_bytes as i128 - p.position_row_bytes as i128)
        }
        Strategy::S2b => {
            keys + p.rows as i128 * p.position_row_bytes as i128
                + p.max_group as i128 * p.sort_tuple_bytes as i128
                + p.aggr_tuple_bytes as i128 * p.window_size as i128
        }
    };
    total.max(0) as u64
}

/// Fill the model symbols from real data: a counting pass over the
/// positional input for N, M, G^max and the maximum frame size; attribute
/// byte widths from the schema; position width from the join-index arity.
pub fn measure_params(
    mut input: Box<dyn PositionalOperator>,
    spec: &WindowSpec,
) -> Result<MemoryModelParams> {
    let tables: Vec<_> = input.tables().to_vec();
    let lookup = |name: &str| {
        crate::position::resolve_attr(&tables, name)
            .ok()
            .map(|(r, _)| r.value_type)
    };
    crate::window::validate_spec(spec, lookup)?;

    let width_of = |attrs: &[String]| -> Result<u64> {
        let mut total = 0u64;
        let mut seen: Vec<&str> = Vec::new();
        for a in attrs {
            if seen.contains(&a.as_str()) {
                continue;
            }
            seen.push(a);
            let (resolved, _) = crate::position::resolve_attr(&tables, a)?;
            total += resolved.value_type.byte_width() as u64;
        }
        Ok(total)
    };

    let sort_attrs: Vec<String> = spec.order_keys.iter().map(|(a, _)| a.clone()).collect();
    let mut aggr_attrs: Vec<String> = Vec::new();
    for f in &spec.functions {
        if f.kind.is_framed() && f.kind != crate::window::FuncKind::Count {
            if let Some(a) = &f.attr {
                if !aggr_attrs.contains(a) {
                    aggr_attrs.push(a.clone());
                }
            }
        }
    }
    let mut sort_aggr = sort_attrs.clone();
    for a in &aggr_attrs {
        if !sort_aggr.contains(a) {
            sort_aggr.push(a.clone());
        }
    }

    // Counting pass: group sizes keyed by encoded partition values, and the
    // per-group order values when a RANGE frame needs its widest window.
    let mut key_readers = Vec::new();
    for key in &spec.partition_keys {
        let (resolved, attr) = crate::position::resolve_attr(&tables, key)?;
        key_readers.push((
            resolved.table_idx,
            tables[resolved.table_idx].reader(&attr)?,
        ));
    }
    let order_reader = match spec.order_keys.first() {
        Some((attr, _))
            if matches!(
                spec.frame,
                Some(FrameSpec {
                    mode: FrameMode::Range,
                    ..
                })
            ) =>
        {
            let (resolved, attr) = crate::position::resolve_attr(&tables, attr)?;
            Some((
                resolved.table_idx,
                tables[resolved.table_idx].reader(&attr)?,
            ))
        }
        _ => None,
    };

    let mut rows = 0u64;
    let mut sizes: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut order_values: HashMap<Vec<u8>, crate::value::ColumnData> = HashMap::new();
    let mut key_buf = Vec::new();
    let mut order_reader = order_reader;
    while let Some(block) = input.next_block()? {
        let mut key_cols = Vec::with_capacity(key_readers.len());
        for (table_idx, reader) in &mut key_readers {
            let positions = block.table_positions(*table_idx);
            key_cols.push(reader.read_column(&positions)?);
        }
        let order_col = match &mut order_reader {
            Some((table_idx, reader)) => {
                let positions = block.table_positions(*table_idx);
                Some(reader.read_column(&positions)?)
            }
            None => None,
        };
        for i in 0..block.len() {
            key_buf.clear();
            for col in &key_cols {
                col.encode_row_into(i, &mut key_buf);
            }
            *sizes.entry(key_buf.clone()).or_insert(0) += 1;
            if let Some(col) = &order_col {
                order_values
                    .entry(key_buf.clone())
                    .or_insert_with(|| {
                        crate::value::ColumnData::with_capacity(&col.value_type(), 0)
                    })
                    .push_from(col, i);
            }
            rows += 1;
        }
    }

    let groups = sizes.len() as u64;
    let max_group = sizes.values().copied().max().unwrap_or(0);

    let window_size = match &spec.frame {
        None => 0,
        Some(frame) => match frame.mode {
            FrameMode::Rows => {
                let off = |b: &crate::window::FrameBound| match b {
                    crate::window::FrameBound::Preceding(v)
                    | crate::window::FrameBound::Following(v) => {
                        v.as_i64().unwrap_or(0).max(0) as u64
                    }
                    crate::window::FrameBound::CurrentRow => 0,
                    _ => max_group,
                };
                (off(&frame.start) + off(&frame.end) + 1).min(max_group)
            }
            FrameMode::Range => {
                // Widest frame over the actual sorted per-group values.
                let mut widest = 0u64;
                for col in order_values.values_mut() {
                    let len = col.len();
                    let mut perm: Vec<u32> = (0..len as u32).collect();
                    perm.sort_unstable_by(|&a, &b| col.cmp_rows(a as usize, col, b as usize));
                    let sorted = col.permute(&perm);
                    for row in 0..len {
                        let (s, e) = frame_bounds(frame, Some(&sorted), row, len);
                        widest = widest.max((e + 1 - s) as u64);
                    }
                }
                widest
            }
        },
    };

    Ok(MemoryModelParams {
        rows,
        groups,
        max_group,
        key_tuple_bytes: width_of(&spec.partition_keys)?,
        sort_aggr_tuple_bytes: width_of(&sort_aggr)?,
        position_row_bytes: 8 * tables.len() as u64,
        sort_tuple_bytes: width_of(&sort_attrs)?,
        aggr_tuple_bytes: width_of(&aggr_attrs)?,
        window_size,
    })
}

/// High-water-mark accounting for operator-attributed bytes. The main
/// counter follows the structures the strategy formulas model; segment-tree
/// bytes go to a second counter so the formula comparison stays clean.
#[derive(Debug, Default, Clone)]
pub struct MemTracker {
    current: u64,
    peak: u64,
    tree_current: u64,
    tree_peak: u64,
}

impl MemTracker {
    pub fn alloc(&mut self, bytes: u64) {
        self.current += bytes;
        self.peak = self.peak.max(self.current);
    }

    pub fn free(&mut self, bytes: u64) {
        debug_assert!(self.current >= bytes, "freeing more than allocated");
        self.current = self.current.saturating_sub(bytes);
    }

    pub fn alloc_tree(&mut self, bytes: u64) {
        self.tree_current += bytes;
        self.tree_peak = self.tree_peak.max(self.tree_current);
    }

    pub fn free_tree(&mut self, bytes: u64) {
        debug_assert!(self.tree_current >= bytes);
        self.tree_current = self.tree_current.saturating_sub(bytes);
    }

    pub fn current(&self) -> u64 {
        self.current
    }

    /// Peak of the formula-modeled structures over the run.
    pub fn peak(&self) -> u64 {
        self.peak
    }

    /// Peak of segment-tree bytes, reported as a separate line.
    pub fn tree_peak(&self) -> u64 {
        self.tree_peak
    }
}

/// Interpretation error for strategies given as strings (CLI surface).
pub fn parse_strategy(s: &str) -> Result<Strategy> {
    Strategy::parse(s).map_err(|_| Error::InvalidSpec(format!("unknown strategy `{s}`")))
}
