//! Group evaluation: naive, cumulative and segment-tree algorithms for the
//! framed aggregates, plus the simplified whole-group pass for ranking
//! functions.
//!
//! All three algorithms answer the same question per row — the monoid fold
//! over the row's frame — and must agree exactly (integer monoids) or within
//! float-roundoff tolerance (float sums, where they associate differently by
//! design).

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::memory::MemTracker;
use crate::monoid::{compose, make_monoid, Monoid, MonoidKind, MonoidPart};
use crate::segtree::{FrameQueryRange, FrameQueryRows, SegmentTree};
use crate::storage::{ColumnReader, TableHandle};
use crate::value::{ColumnData, Value, ValueType};

use super::bounds::{frame_bounds, range_bound_value};
use super::exec::{
    AggAccess, AggPlan, AttrSource, Group, OutSlot, Plan, RunStats, EXEC_BLOCK_ROWS,
};
use super::spec::{EvalAlgorithm, FrameMode, FrameSpec, FuncKind};

const COUNT_ONE: Value = Value::Int64(1);

/// Evaluate every window function of the plan over one ordered group,
/// returning one output column per declared function.
pub(super) fn evaluate_group(
    plan: &Plan,
    group: &Group,
    algo: EvalAlgorithm,
    mut s2b: Option<&mut S2bState>,
    tracker: &mut MemTracker,
    stats: &mut RunStats,
) -> Result<Vec<ColumnData>> {
    let len = group.rows;
    let agg_outs = if plan.aggs.is_empty() || len == 0 {
        plan.aggs
            .iter()
            .map(|a| ColumnData::with_capacity(&a.out_type, 0))
            .collect()
    } else {
        let frame = plan.frame.as_ref().expect("framed functions need a frame");
        let order_col = plan.order_cols.first().map(|(i, _)| &group.mat[*i]);
        match algo {
            EvalAlgorithm::Naive => eval_naive(
                plan,
                group,
                frame,
                order_col,
                s2b.as_deref_mut(),
                tracker,
                stats,
            )?,
            EvalAlgorithm::Cumulative => eval_cumulative(
                plan,
                group,
                frame,
                order_col,
                s2b.as_deref_mut(),
                tracker,
                stats,
            )?,
            EvalAlgorithm::SegmentTree => {
                eval_segment_tree(plan, group, frame, order_col, s2b, tracker, stats)?
            }
        }
    };
    let rank_outs = eval_ranking(plan, group);

    let mut agg_outs: Vec<Option<ColumnData>> = agg_outs.into_iter().map(Some).collect();
    let mut rank_outs: Vec<Option<ColumnData>> = rank_outs.into_iter().map(Some).collect();
    Ok(plan
        .out_slots
        .iter()
        .map(|slot| match slot {
            OutSlot::Agg(i) => agg_outs[*i].take().expect("agg output"),
            OutSlot::Rank(i) => rank_outs[*i].take().expect("rank output"),
        })
        .collect())
}

fn leaf_value(agg: &AggPlan, group: &Group, cache: Option<&FrameCache>, row: usize) -> Value {
    match agg.access {
        AggAccess::Mat(c) => group.mat[c].value(row),
        AggAccess::Cache(c) => cache
            .expect("on-demand access needs the cache")
            .value(c, row),
        AggAccess::CountOnly => COUNT_ONE,
    }
}

/// Recompute the fold from scratch for every frame instance.
fn eval_naive(
    plan: &Plan,
    group: &Group,
    frame: &FrameSpec,
    order_col: Option<&ColumnData>,
    mut s2b: Option<&mut S2bState>,
    tracker: &mut MemTracker,
    stats: &mut RunStats,
) -> Result<Vec<ColumnData>> {
    let len = group.rows;
    let parts: Vec<MonoidPart> = plan.aggs.iter().map(agg_part).collect();
    let mut outs: Vec<ColumnData> = plan
        .aggs
        .iter()
        .map(|a| ColumnData::with_capacity(&a.out_type, len))
        .collect();
    let mut accs: Vec<Value> = parts.iter().map(|p| p.identity()).collect();
    for row in 0..len {
        let (start, end) = frame_bounds(frame, order_col, row, len);
        if let Some(state) = s2b.as_deref_mut() {
            state.slide_to(group, start, end, tracker)?;
        }
        let cache = s2b.as_deref().map(|s| &s.cache);
        for (acc, part) in accs.iter_mut().zip(&parts) {
            *acc = part.identity();
        }
        for r in start..=end {
            for (i, agg) in plan.aggs.iter().enumerate() {
                let v = leaf_value(agg, group, cache, r);
                parts[i].combine_assign(&mut accs[i], &v);
            }
        }
        stats.combine_ops += ((end - start + 1) * plan.aggs.len()) as u64;
        for (out, acc) in outs.iter_mut().zip(&accs) {
            out.push_value(acc);
        }
    }
    Ok(outs)
}

fn agg_part(agg: &AggPlan) -> MonoidPart {
    MonoidPart {
        kind: agg.kind,
        value_type: agg.value_type,
    }
}

/// Running per-function state for the cumulative algorithm.
enum CumState {
    SumI(i64),
    /// Neumaier-compensated running sum; the add/subtract stream would
    /// otherwise drift past the comparison tolerance on long groups.
    SumF {
        sum: f64,
        compensation: f64,
    },
    Count(i64),
    /// Ordered multiset of the frame's values (binary-search-tree role);
    /// duplicates tracked by count.
    Ordered {
        map: BTreeMap<Value, u32>,
        min: bool,
    },
}

impl CumState {
    fn new(agg: &AggPlan) -> CumState {
        match agg.kind {
            MonoidKind::SumI64 => CumState::SumI(0),
            MonoidKind::SumF64 => CumState::SumF {
                sum: 0.0,
                compensation: 0.0,
            },
            MonoidKind::Count => CumState::Count(0),
            MonoidKind::Min => CumState::Ordered {
                map: BTreeMap::new(),
                min: true,
            },
            MonoidKind::Max => CumState::Ordered {
                map: BTreeMap::new(),
                min: false,
            },
        }
    }

    fn add(&mut self, v: Value) {
        match self {
            CumState::SumI(s) => *s += v.as_i64().expect("int sum"),
            CumState::SumF { sum, compensation } => {
                neumaier_add(sum, compensation, v.as_f64().expect("float sum"))
            }
            CumState::Count(c) => *c += 1,
            CumState::Ordered { map, .. } => *map.entry(v).or_insert(0) += 1,
        }
    }

    fn remove(&mut self, v: Value) {
        match self {
            CumState::SumI(s) => *s -= v.as_i64().expect("int sum"),
            CumState::SumF { sum, compensation } => {
                neumaier_add(sum, compensation, -v.as_f64().expect("float sum"))
            }
            CumState::Count(c) => *c -= 1,
            CumState::Ordered { map, .. } => match map.get_mut(&v) {
                Some(n) if *n > 1 => *n -= 1,
                Some(_) => {
                    map.remove(&v);
                }
                None => debug_assert!(false, "removing value not in frame"),
            },
        }
    }

    fn current(&self, part: &MonoidPart) -> Value {
        match self {
            CumState::SumI(s) => Value::Int64(*s),
            CumState::SumF { sum, compensation } => Value::Float64(sum + compensation),
            CumState::Count(c) => Value::Int64(*c),
            CumState::Ordered { map, min } => {
                let found = if *min {
                    map.keys().next()
                } else {
                    map.keys().next_back()
                };
                found.cloned().unwrap_or_else(|| part.identity())
            }
        }
    }
}

fn neumaier_add(sum: &mut f64, compensation: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *compensation += (*sum - t) + x;
    } else {
        *compensation += (x - t) + *sum;
    }
    *sum = t;
}

/// Reuse the previous frame's result, folding in entering rows and removing
/// leaving rows. Frames of the legal bound kinds move monotonically in both
/// borders, so each row costs at most the border movement.
fn eval_cumulative(
    plan: &Plan,
    group: &Group,
    frame: &FrameSpec,
    order_col: Option<&ColumnData>,
    mut s2b: Option<&mut S2bState>,
    tracker: &mut MemTracker,
    stats: &mut RunStats,
) -> Result<Vec<ColumnData>> {
    let len = group.rows;
    let parts: Vec<MonoidPart> = plan.aggs.iter().map(agg_part).collect();
    let mut outs: Vec<ColumnData> = plan
        .aggs
        .iter()
        .map(|a| ColumnData::with_capacity(&a.out_type, len))
        .collect();
    let mut states: Vec<CumState> = plan.aggs.iter().map(CumState::new).collect();
    let mut prev_start = 0usize;
    let mut prev_end: Option<usize> = None;
    for row in 0..len {
        let (start, end) = frame_bounds(frame, order_col, row, len);
        debug_assert!(start >= prev_start, "frame start must be monotone");
        debug_assert!(
            prev_end.is_none_or(|e| end >= e),
            "frame end must be monotone"
        );

        let leave_end = match prev_end {
            // Disjoint move: everything previously in the frame leaves.
            Some(pe) if start > pe => pe + 1,
            _ => start,
        };
        let cache = s2b.as_deref().map(|s| &s.cache);
        for r in prev_start..leave_end {
            for (i, agg) in plan.aggs.iter().enumerate() {
                let v = leaf_value(agg, group, cache, r);
                states[i].remove(v);
            }
            stats.combine_ops += plan.aggs.len() as u64;
        }
        if let Some(state) = s2b.as_deref_mut() {
            state.slide_to(group, start, end, tracker)?;
        }
        let cache = s2b.as_deref().map(|s| &s.cache);
        let enter_start = match prev_end {
            Some(pe) if start <= pe => pe + 1,
            _ => start,
        };
        for r in enter_start..=end {
            for (i, agg) in plan.aggs.iter().enumerate() {
                let v = leaf_value(agg, group, cache, r);
                states[i].add(v);
            }
            stats.combine_ops += plan.aggs.len() as u64;
        }
        prev_start = start;
        prev_end = Some(end);
        for ((out, state), part) in outs.iter_mut().zip(&states).zip(&parts) {
            out.push_value(&state.current(part));
        }
    }
    Ok(outs)
}

/// Build one segment tree per group over the product monoid of all framed
/// functions, then answer every row with one tree query.
fn eval_segment_tree(
    plan: &Plan,
    group: &Group,
    frame: &FrameSpec,
    order_col: Option<&ColumnData>,
    s2b: Option<&mut S2bState>,
    tracker: &mut MemTracker,
    stats: &mut RunStats,
) -> Result<Vec<ColumnData>> {
    let len = group.rows;
    let monoids: Vec<Monoid> = plan
        .aggs
        .iter()
        .map(|a| make_monoid(a.kind, a.value_type))
        .collect::<Result<_>>()?;
    let monoid = compose(&monoids)?;

    let needs_feed = plan
        .aggs
        .iter()
        .any(|a| matches!(a.access, AggAccess::Cache(_)));
    let mut feed = if needs_feed {
        Some(LeafFeed::new(
            s2b.expect("on-demand reads need S2b state"),
            group,
        )?)
    } else {
        None
    };
    let mut feed_err: Option<Error> = None;
    let leaf_fn = |i: usize, out: &mut Vec<Value>| {
        if let Some(feed) = feed.as_mut() {
            if feed_err.is_none() {
                if let Err(e) = feed.ensure(i, group) {
                    feed_err = Some(e);
                }
            }
        }
        for agg in &plan.aggs {
            let v = match agg.access {
                AggAccess::Mat(c) => group.mat[c].value(i),
                AggAccess::CountOnly => COUNT_ONE,
                AggAccess::Cache(c) => match (&feed, &feed_err) {
                    (Some(feed), None) => feed.value(c, i),
                    _ => agg_part(agg).identity(),
                },
            };
            out.push(v);
        }
    };

    let tree = match frame.mode {
        FrameMode::Rows => SegmentTree::build_with(monoid, len, leaf_fn)?,
        FrameMode::Range => {
            let keys = order_col.expect("RANGE needs the ordering column").clone();
            SegmentTree::build_keyed_with(monoid, keys, len, leaf_fn)?
        }
    };
    if let Some(e) = feed_err {
        return Err(e);
    }
    drop(feed);
    stats.combine_ops += tree.build_combines();
    tracker.alloc_tree(tree.byte_size());

    let mut outs: Vec<ColumnData> = plan
        .aggs
        .iter()
        .map(|a| ColumnData::with_capacity(&a.out_type, len))
        .collect();
    let identity = tree.monoid().identity();
    let mut acc = identity.clone();
    for row in 0..len {
        acc.clone_from_slice(&identity);
        let cost = match frame.mode {
            FrameMode::Rows => {
                let (start, end) = frame_bounds(frame, order_col, row, len);
                tree.eval_rows_into(
                    FrameQueryRows {
                        f_left: start as i64,
                        f_right: end as i64,
                    },
                    &mut acc,
                )
            }
            FrameMode::Range => {
                let col = order_col.expect("RANGE ordering column");
                let q = FrameQueryRange {
                    f_left: range_bound_value(col, row, &frame.start),
                    f_right: range_bound_value(col, row, &frame.end),
                };
                tree.eval_range_into(&q, &mut acc)
            }
        };
        stats.tree_visits += cost.visits;
        stats.combine_ops += cost.combines;
        for (out, v) in outs.iter_mut().zip(&acc) {
            out.push_value(v);
        }
    }
    tracker.free_tree(tree.byte_size());
    Ok(outs)
}

/// Ranking functions: the window is the whole ordered group, values depend
/// only on the position and the peer structure of the ORDER BY keys.
fn eval_ranking(plan: &Plan, group: &Group) -> Vec<ColumnData> {
    if plan.rank_kinds.is_empty() {
        return Vec::new();
    }
    let len = group.rows;
    let order_cols: Vec<&ColumnData> = plan
        .order_cols
        .iter()
        .map(|(i, _)| &group.mat[*i])
        .collect();
    let mut outs: Vec<Vec<i64>> = vec![Vec::with_capacity(len); plan.rank_kinds.len()];
    let mut rank = 1i64;
    let mut dense = 0i64;
    for row in 0..len {
        let peer_of_prev = row > 0
            && order_cols
                .iter()
                .all(|c| c.cmp_rows(row - 1, c, row) == std::cmp::Ordering::Equal);
        if !peer_of_prev {
            rank = row as i64 + 1;
            dense += 1;
        }
        for (out, kind) in outs.iter_mut().zip(&plan.rank_kinds) {
            out.push(match kind {
                FuncKind::RowNumber => row as i64 + 1,
                FuncKind::Rank => rank,
                FuncKind::DenseRank => dense,
                _ => unreachable!("ranking kinds only"),
            });
        }
    }
    outs.into_iter().map(ColumnData::Int64).collect()
}

/// On-demand machinery for S2b: per-attribute readers plus the sliding
/// frame cache sized by the widest frame seen.
pub(super) struct S2bState {
    readers: Vec<(usize, ColumnReader)>,
    pub cache: FrameCache,
    position_buf: Vec<u64>,
}

impl S2bState {
    pub fn open(plan: &Plan, tables: &[TableHandle]) -> Result<S2bState> {
        let mut readers = Vec::with_capacity(plan.ondemand_aggr.len());
        for attr in &plan.ondemand_aggr {
            match &attr.source {
                AttrSource::Table { table_idx, attr } => {
                    readers.push((*table_idx, tables[*table_idx].reader(attr)?))
                }
                AttrSource::TupleCol(_) => unreachable!("S2b runs on positional input"),
            }
        }
        Ok(S2bState {
            readers,
            cache: FrameCache::new(plan),
            position_buf: Vec::new(),
        })
    }

    pub fn reset_group(&mut self) {
        self.cache.reset();
    }

    /// Make the cache hold exactly rows `start..=end` of the current group:
    /// evict below `start`, fetch through `end`.
    pub fn slide_to(
        &mut self,
        group: &Group,
        start: usize,
        end: usize,
        tracker: &mut MemTracker,
    ) -> Result<()> {
        self.cache.advance_base(start);
        let fetch_from = self.cache.base + self.cache.len;
        if end < fetch_from {
            return Ok(());
        }
        let arity = group.positions.len() / group.rows;
        for (c, (table_idx, reader)) in self.readers.iter_mut().enumerate() {
            self.position_buf.clear();
            for r in fetch_from..=end {
                self.position_buf
                    .push(group.positions[r * arity + *table_idx]);
            }
            let col = reader.read_column(&self.position_buf)?;
            self.cache.append(c, &col);
        }
        self.cache.len += end + 1 - fetch_from;
        self.cache.track_growth(tracker);
        Ok(())
    }

    pub fn release(self, tracker: &mut MemTracker) {
        tracker.free((self.cache.max_rows * self.cache.row_width) as u64);
    }
}

enum CacheCol {
    Int64(VecDeque<i64>),
    Float64(VecDeque<f64>),
    Text { width: u8, bytes: VecDeque<u8> },
}

impl CacheCol {
    fn new(ty: &ValueType) -> CacheCol {
        match ty {
            ValueType::Int64 => CacheCol::Int64(VecDeque::new()),
            ValueType::Float64 => CacheCol::Float64(VecDeque::new()),
            ValueType::FixedText(w) => CacheCol::Text {
                width: *w,
                bytes: VecDeque::new(),
            },
        }
    }

    fn pop_front(&mut self) {
        match self {
            CacheCol::Int64(v) => {
                v.pop_front();
            }
            CacheCol::Float64(v) => {
                v.pop_front();
            }
            CacheCol::Text { width, bytes } => {
                bytes.drain(..*width as usize);
            }
        }
    }

    fn clear(&mut self) {
        match self {
            CacheCol::Int64(v) => v.clear(),
            CacheCol::Float64(v) => v.clear(),
            CacheCol::Text { bytes, .. } => bytes.clear(),
        }
    }

    fn value(&self, idx: usize) -> Value {
        match self {
            CacheCol::Int64(v) => Value::Int64(v[idx]),
            CacheCol::Float64(v) => Value::Float64(v[idx]),
            CacheCol::Text { width, bytes } => {
                let w = *width as usize;
                let mut raw: Vec<u8> = (idx * w..(idx + 1) * w).map(|i| bytes[i]).collect();
                let end = raw.iter().rposition(|&b| b != 0).map_or(0, |p| p + 1);
                raw.truncate(end);
                Value::Text(raw)
            }
        }
    }
}

/// Sliding window of materialized aggregate-attribute values, capacity
/// pinned to the widest frame seen so overlapping frames reread nothing.
pub(super) struct FrameCache {
    base: usize,
    len: usize,
    cols: Vec<CacheCol>,
    max_rows: usize,
    row_width: usize,
}

impl FrameCache {
    fn new(plan: &Plan) -> FrameCache {
        FrameCache {
            base: 0,
            len: 0,
            cols: plan
                .ondemand_aggr
                .iter()
                .map(|a| CacheCol::new(&a.ty))
                .collect(),
            max_rows: 0,
            row_width: plan.ondemand_aggr.iter().map(|a| a.ty.byte_width()).sum(),
        }
    }

    fn reset(&mut self) {
        self.base = 0;
        self.len = 0;
        for col in &mut self.cols {
            col.clear();
        }
    }

    fn advance_base(&mut self, new_base: usize) {
        debug_assert!(new_base >= self.base, "cache slides forward only");
        let evict = (new_base - self.base).min(self.len);
        for _ in 0..evict {
            for col in &mut self.cols {
                col.pop_front();
            }
        }
        self.len -= evict;
        self.base = new_base;
    }

    fn append(&mut self, col_idx: usize, values: &ColumnData) {
        match (&mut self.cols[col_idx], values) {
            (CacheCol::Int64(dst), ColumnData::Int64(src)) => dst.extend(src.iter().copied()),
            (CacheCol::Float64(dst), ColumnData::Float64(src)) => dst.extend(src.iter().copied()),
            (CacheCol::Text { bytes, .. }, ColumnData::Text { bytes: src, .. }) => {
                bytes.extend(src.iter().copied())
            }
            _ => panic!("cache column type mismatch"),
        }
    }

    fn track_growth(&mut self, tracker: &mut MemTracker) {
        if self.len > self.max_rows {
            tracker.alloc(((self.len - self.max_rows) * self.row_width) as u64);
            self.max_rows = self.len;
        }
    }

    pub fn value(&self, col_idx: usize, row: usize) -> Value {
        debug_assert!(
            row >= self.base && row < self.base + self.len,
            "row outside cache window"
        );
        self.cols[col_idx].value(row - self.base)
    }
}

/// Sequential chunked reader feeding segment-tree leaves under S2b without
/// materializing the whole group's aggregate columns.
struct LeafFeed<'a> {
    state: &'a mut S2bState,
    bufs: Vec<ColumnData>,
    start: usize,
    len: usize,
}

impl<'a> LeafFeed<'a> {
    fn new(state: &'a mut S2bState, group: &Group) -> Result<LeafFeed<'a>> {
        let mut feed = LeafFeed {
            state,
            bufs: Vec::new(),
            start: 0,
            len: 0,
        };
        feed.load(0, group)?;
        Ok(feed)
    }

    fn load(&mut self, start: usize, group: &Group) -> Result<()> {
        let end = (start + EXEC_BLOCK_ROWS).min(group.rows);
        let arity = group.positions.len() / group.rows;
        self.bufs.clear();
        for (table_idx, reader) in self.state.readers.iter_mut() {
            self.state.position_buf.clear();
            for r in start..end {
                self.state
                    .position_buf
                    .push(group.positions[r * arity + *table_idx]);
            }
            self.bufs
                .push(reader.read_column(&self.state.position_buf)?);
        }
        self.start = start;
        self.len = end - start;
        Ok(())
    }

    fn ensure(&mut self, row: usize, group: &Group) -> Result<()> {
        if row >= self.start + self.len {
            self.load(self.start + self.len, group)?;
        }
        debug_assert!(row >= self.start && row < self.start + self.len);
        Ok(())
    }

    fn value(&self, col: usize, row: usize) -> Value {
        self.bufs[col].value(row - self.start)
    }
}
