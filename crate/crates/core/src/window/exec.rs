//! Window-operator execution: attribute planning, hash partitioning with
//! per-strategy payloads, per-group ordering, and output emission.
//!
//! Partitioning populates a hash table keyed by the encoded partition
//! values. What the table holds as payload depends on the strategy: S1
//! materializes (sort ∪ aggregate ∪ extra pass-through) tuples at insertion
//! time, S2a and S2b store positional rows and defer materialization to
//! group processing. Groups are then processed one at a time in first-seen
//! order: ordered, evaluated, emitted, released.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::memory::MemTracker;
use crate::monoid::MonoidKind;
use crate::position::{resolve_attr, PositionalOperator, TupleBlock};
use crate::storage::{ColumnReader, TableHandle};
use crate::value::{decode_value, ColumnData, Value, ValueType};

use super::eval::{self, S2bState};
use super::spec::{
    output_type, validate_spec, EvalAlgorithm, FrameSpec, FuncKind, SortDirection, Strategy,
    WindowSpec,
};

/// Logical rows per position chunk and per emitted output block.
pub(super) const EXEC_BLOCK_ROWS: usize = 4096;

/// Operator input: either a positional plan section (strategies apply) or a
/// tuple stream from past the materialization point (payload is tuples and
/// the strategy is ignored).
pub enum WindowInput {
    Positional(Box<dyn PositionalOperator>),
    Tuples {
        schema: Vec<(String, ValueType)>,
        blocks: Vec<TupleBlock>,
    },
}

/// Counters collected over one operator run.
#[derive(Debug, Default, Clone)]
pub struct RunStats {
    pub rows_in: u64,
    pub rows_out: u64,
    pub groups: u64,
    pub max_group: u64,
    /// Monoid combine / cumulative update operations, including segment-tree
    /// build and query folds.
    pub combine_ops: u64,
    /// Segment-tree node visits across all frame queries.
    pub tree_visits: u64,
    /// High-water mark of formula-modeled operator bytes.
    pub peak_bytes: u64,
    /// High-water mark of segment-tree bytes (separate line).
    pub tree_peak_bytes: u64,
}

/// Result of one run: output schema, blocks in emission order
/// (group-major, sorted within each group), and run counters.
pub struct WindowRun {
    pub schema: Vec<(String, ValueType)>,
    pub blocks: Vec<TupleBlock>,
    pub stats: RunStats,
}

impl WindowRun {
    pub fn row_count(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// All output rows materialized as value tuples.
    pub fn rows(&self) -> Vec<Vec<Value>> {
        let mut out = Vec::with_capacity(self.row_count());
        for block in &self.blocks {
            for i in 0..block.len() {
                out.push(block.row(i));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum PayloadMode {
    /// Tuples materialized during population (S1, and any tuple input).
    MatUpfront,
    /// Positions in the table; full materialization per group (S2a).
    MatPerGroup,
    /// Positions in the table; only sort attributes materialized, the rest
    /// on demand (S2b).
    SortOnly,
}

#[derive(Debug, Clone)]
pub(super) enum AttrSource {
    Table { table_idx: usize, attr: String },
    TupleCol(usize),
}

#[derive(Debug, Clone)]
pub(super) struct PlanAttr {
    pub name: String,
    pub ty: ValueType,
    pub source: AttrSource,
}

#[derive(Debug, Clone, Copy)]
pub(super) enum AggAccess {
    /// Materialized column index.
    Mat(usize),
    /// On-demand cache column index (S2b).
    Cache(usize),
    /// COUNT: leaves are constant ones, no column read.
    CountOnly,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct AggPlan {
    pub kind: MonoidKind,
    pub value_type: ValueType,
    pub access: AggAccess,
    pub out_type: ValueType,
}

#[derive(Debug, Clone, Copy)]
pub(super) enum OutSlot {
    Agg(usize),
    Rank(usize),
}

#[derive(Debug, Clone)]
pub(super) enum PassSource {
    /// Decoded from the group key at this byte offset.
    Key { offset: usize, ty: ValueType },
    /// Materialized column index.
    Mat(usize),
    /// Positional read at emission time (S2b extras).
    OnDemand(usize),
}

pub(super) struct Plan {
    pub mode: PayloadMode,
    pub frame: Option<FrameSpec>,
    pub key_attrs: Vec<PlanAttr>,
    pub key_width: usize,
    pub mat_attrs: Vec<PlanAttr>,
    pub mat_width: usize,
    pub order_cols: Vec<(usize, SortDirection)>,
    pub ondemand_aggr: Vec<PlanAttr>,
    pub ondemand_pass: Vec<PlanAttr>,
    pub aggs: Vec<AggPlan>,
    pub rank_kinds: Vec<FuncKind>,
    pub out_slots: Vec<OutSlot>,
    pub pass_sources: Vec<PassSource>,
    pub out_schema: Vec<(String, ValueType)>,
    /// Positions per logical row (joined table count); 0 for tuple input.
    pub pos_arity: usize,
    pub pos_row_width: usize,
}

enum InputSchema<'a> {
    Tables(&'a [TableHandle]),
    Tuple(&'a [(String, ValueType)]),
}

impl<'a> InputSchema<'a> {
    fn lookup(&self, name: &str) -> Option<ValueType> {
        match self {
            InputSchema::Tables(tables) => {
                resolve_attr(tables, name).ok().map(|(r, _)| r.value_type)
            }
            InputSchema::Tuple(schema) => schema.iter().find(|(n, _)| n == name).map(|(_, t)| *t),
        }
    }

    fn plan_attr(&self, name: &str) -> Result<PlanAttr> {
        match self {
            InputSchema::Tables(tables) => {
                let (resolved, attr) = resolve_attr(tables, name)?;
                Ok(PlanAttr {
                    name: name.to_string(),
                    ty: resolved.value_type,
                    source: AttrSource::Table {
                        table_idx: resolved.table_idx,
                        attr,
                    },
                })
            }
            InputSchema::Tuple(schema) => {
                let idx = schema
                    .iter()
                    .position(|(n, _)| n == name)
                    .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
                Ok(PlanAttr {
                    name: name.to_string(),
                    ty: schema[idx].1,
                    source: AttrSource::TupleCol(idx),
                })
            }
        }
    }
}

impl Plan {
    fn build(
        spec: &WindowSpec,
        pass_through: &[String],
        mode: PayloadMode,
        input: &InputSchema,
        pos_arity: usize,
    ) -> Result<Plan> {
        let monoid_kinds = validate_spec(spec, |name| input.lookup(name))?;

        let key_attrs: Vec<PlanAttr> = spec
            .partition_keys
            .iter()
            .map(|k| input.plan_attr(k))
            .collect::<Result<_>>()?;
        let key_width = key_attrs.iter().map(|a| a.ty.byte_width()).sum();

        // Materialized columns: sort attributes first (all strategies need
        // them for ordering), then aggregate and extra pass-through
        // attributes unless the strategy defers those.
        let mut mat_attrs: Vec<PlanAttr> = Vec::new();
        let mat_index = |attrs: &mut Vec<PlanAttr>, attr: PlanAttr| -> usize {
            if let Some(i) = attrs.iter().position(|a| a.name == attr.name) {
                i
            } else {
                attrs.push(attr);
                attrs.len() - 1
            }
        };

        let mut order_cols = Vec::with_capacity(spec.order_keys.len());
        for (attr, dir) in &spec.order_keys {
            let idx = mat_index(&mut mat_attrs, input.plan_attr(attr)?);
            order_cols.push((idx, *dir));
        }

        let mut ondemand_aggr: Vec<PlanAttr> = Vec::new();
        let mut aggs = Vec::new();
        let mut rank_kinds = Vec::new();
        let mut out_slots = Vec::with_capacity(spec.functions.len());
        for (f, kind) in spec.functions.iter().zip(&monoid_kinds) {
            match kind {
                Some(mk) => {
                    let (value_type, access) = if *mk == MonoidKind::Count {
                        (ValueType::Int64, AggAccess::CountOnly)
                    } else {
                        let attr = f.attr.as_deref().expect("validated framed attr");
                        let planned = input.plan_attr(attr)?;
                        let ty = planned.ty;
                        let access = if mode == PayloadMode::SortOnly {
                            if let Some(i) = mat_attrs.iter().position(|a| a.name == attr) {
                                AggAccess::Mat(i)
                            } else if let Some(i) =
                                ondemand_aggr.iter().position(|a| a.name == attr)
                            {
                                AggAccess::Cache(i)
                            } else {
                                ondemand_aggr.push(planned);
                                AggAccess::Cache(ondemand_aggr.len() - 1)
                            }
                        } else {
                            AggAccess::Mat(mat_index(&mut mat_attrs, planned))
                        };
                        (ty, access)
                    };
                    out_slots.push(OutSlot::Agg(aggs.len()));
                    aggs.push(AggPlan {
                        kind: *mk,
                        value_type,
                        access,
                        out_type: output_type(f.kind, Some(value_type)),
                    });
                }
                None => {
                    out_slots.push(OutSlot::Rank(rank_kinds.len()));
                    rank_kinds.push(f.kind);
                }
            }
        }

        // Pass-through resolution: group key, materialized column, or (S2b
        // only) a positional read at emission time.
        let mut ondemand_pass: Vec<PlanAttr> = Vec::new();
        let mut pass_sources = Vec::with_capacity(pass_through.len());
        let mut out_schema = Vec::new();
        for name in pass_through {
            let ty = input
                .lookup(name)
                .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
            let source = if let Some(k) = key_attrs.iter().position(|a| &a.name == name) {
                let offset = key_attrs[..k].iter().map(|a| a.ty.byte_width()).sum();
                PassSource::Key { offset, ty }
            } else if let Some(i) = mat_attrs.iter().position(|a| &a.name == name) {
                PassSource::Mat(i)
            } else if mode == PayloadMode::SortOnly {
                let planned = input.plan_attr(name)?;
                if let Some(i) = ondemand_pass.iter().position(|a| &a.name == name) {
                    PassSource::OnDemand(i)
                } else {
                    ondemand_pass.push(planned);
                    PassSource::OnDemand(ondemand_pass.len() - 1)
                }
            } else {
                PassSource::Mat(mat_index(&mut mat_attrs, input.plan_attr(name)?))
            };
            pass_sources.push(source);
            out_schema.push((name.clone(), ty));
        }
        for (f, kind) in spec.functions.iter().zip(&monoid_kinds) {
            let attr_type = match kind {
                Some(MonoidKind::Count) | None => None,
                Some(_) => f.attr.as_deref().and_then(|a| input.lookup(a)),
            };
            out_schema.push((f.output.clone(), output_type(f.kind, attr_type)));
        }

        let mat_width = mat_attrs.iter().map(|a| a.ty.byte_width()).sum();
        Ok(Plan {
            mode,
            frame: spec.frame.clone(),
            key_attrs,
            key_width,
            mat_attrs,
            mat_width,
            order_cols,
            ondemand_aggr,
            ondemand_pass,
            aggs,
            rank_kinds,
            out_slots,
            pass_sources,
            out_schema,
            pos_arity,
            pos_row_width: 8 * pos_arity,
        })
    }
}

/// One partition: encoded key, payload per strategy, arrival order
/// preserved inside the payload vectors.
pub(super) struct Group {
    pub key: Vec<u8>,
    pub rows: usize,
    pub pos_chunks: Vec<Box<[u64]>>,
    cur_chunk: Vec<u64>,
    pub mat: Vec<ColumnData>,
    /// Flat sorted positions, filled by the S2b ordering step.
    pub positions: Vec<u64>,
}

impl Group {
    fn new(key: Vec<u8>, plan: &Plan) -> Group {
        let mat = match plan.mode {
            PayloadMode::MatUpfront => plan
                .mat_attrs
                .iter()
                .map(|a| ColumnData::with_capacity(&a.ty, 0))
                .collect(),
            _ => Vec::new(),
        };
        Group {
            key,
            rows: 0,
            pos_chunks: Vec::new(),
            cur_chunk: Vec::new(),
            mat,
            positions: Vec::new(),
        }
    }

    fn push_positions(&mut self, row: &[u64]) {
        self.cur_chunk.extend_from_slice(row);
        if self.cur_chunk.len() >= EXEC_BLOCK_ROWS * row.len() {
            let chunk = std::mem::take(&mut self.cur_chunk);
            self.pos_chunks.push(chunk.into_boxed_slice());
        }
    }

    fn seal(&mut self) {
        if !self.cur_chunk.is_empty() {
            let chunk = std::mem::take(&mut self.cur_chunk);
            self.pos_chunks.push(chunk.into_boxed_slice());
        }
    }
}

pub(super) struct Exec<'a> {
    plan: &'a Plan,
    algo: EvalAlgorithm,
    tracker: MemTracker,
    stats: RunStats,
    groups: Vec<Group>,
    index: HashMap<Vec<u8>, usize>,
}

impl<'a> Exec<'a> {
    fn new(plan: &'a Plan, algo: EvalAlgorithm) -> Exec<'a> {
        Exec {
            plan,
            algo,
            tracker: MemTracker::default(),
            stats: RunStats::default(),
            groups: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn group_for_row(
        &mut self,
        key_cols: &[ColumnData],
        row: usize,
        key_buf: &mut Vec<u8>,
    ) -> usize {
        key_buf.clear();
        for col in key_cols {
            col.encode_row_into(row, key_buf);
        }
        if let Some(&idx) = self.index.get(key_buf.as_slice()) {
            idx
        } else {
            self.tracker.alloc(self.plan.key_width as u64);
            let idx = self.groups.len();
            self.groups.push(Group::new(key_buf.clone(), self.plan));
            self.index.insert(key_buf.clone(), idx);
            idx
        }
    }

    fn populate_positional(&mut self, input: &mut dyn PositionalOperator) -> Result<()> {
        let tables = input.tables().clone();
        let open = |attrs: &[PlanAttr]| -> Result<Vec<(usize, ColumnReader)>> {
            attrs
                .iter()
                .map(|a| match &a.source {
                    AttrSource::Table { table_idx, attr } => {
                        Ok((*table_idx, tables[*table_idx].reader(attr)?))
                    }
                    AttrSource::TupleCol(_) => unreachable!("positional input"),
                })
                .collect()
        };
        let mut key_readers = open(&self.plan.key_attrs)?;
        let mut mat_readers = if self.plan.mode == PayloadMode::MatUpfront {
            open(&self.plan.mat_attrs)?
        } else {
            Vec::new()
        };

        let mut key_buf = Vec::with_capacity(self.plan.key_width);
        while let Some(block) = input.next_block()? {
            let mut key_cols = Vec::with_capacity(key_readers.len());
            for (table_idx, reader) in &mut key_readers {
                let positions = block.table_positions(*table_idx);
                key_cols.push(reader.read_column(&positions)?);
            }
            let mut mat_cols = Vec::with_capacity(mat_readers.len());
            for (table_idx, reader) in &mut mat_readers {
                let positions = block.table_positions(*table_idx);
                mat_cols.push(reader.read_column(&positions)?);
            }
            for row in 0..block.len() {
                let g = self.group_for_row(&key_cols, row, &mut key_buf);
                let group = &mut self.groups[g];
                group.rows += 1;
                match self.plan.mode {
                    PayloadMode::MatUpfront => {
                        for (c, col) in mat_cols.iter().enumerate() {
                            group.mat[c].push_from(col, row);
                        }
                        self.tracker.alloc(self.plan.mat_width as u64);
                    }
                    _ => {
                        group.push_positions(block.row(row));
                        self.tracker.alloc(self.plan.pos_row_width as u64);
                    }
                }
                self.stats.rows_in += 1;
            }
        }
        for g in &mut self.groups {
            g.seal();
        }
        Ok(())
    }

    fn populate_tuples(&mut self, blocks: &[TupleBlock]) -> Result<()> {
        let col_of = |attr: &PlanAttr| match attr.source {
            AttrSource::TupleCol(i) => i,
            _ => unreachable!("tuple input"),
        };
        let key_idx: Vec<usize> = self.plan.key_attrs.iter().map(col_of).collect();
        let mat_idx: Vec<usize> = self.plan.mat_attrs.iter().map(col_of).collect();
        let mut key_buf = Vec::with_capacity(self.plan.key_width);
        for block in blocks {
            let key_cols: Vec<ColumnData> =
                key_idx.iter().map(|&i| block.columns[i].clone()).collect();
            for row in 0..block.len() {
                let g = self.group_for_row(&key_cols, row, &mut key_buf);
                let group = &mut self.groups[g];
                group.rows += 1;
                for (c, &i) in mat_idx.iter().enumerate() {
                    group.mat[c].push_from(&block.columns[i], row);
                }
                self.tracker.alloc(self.plan.mat_width as u64);
                self.stats.rows_in += 1;
            }
        }
        Ok(())
    }

    /// S2a: materialize every planned column for the group, dropping each
    /// position chunk right after it has been read.
    fn materialize_group(&mut self, g: usize, readers: &mut [(usize, ColumnReader)]) -> Result<()> {
        let arity = self.plan.pos_arity;
        let group = &mut self.groups[g];
        group.mat = self
            .plan
            .mat_attrs
            .iter()
            .map(|a| ColumnData::with_capacity(&a.ty, group.rows))
            .collect();
        let mut positions = Vec::with_capacity(EXEC_BLOCK_ROWS);
        for chunk in std::mem::take(&mut group.pos_chunks) {
            let chunk_rows = chunk.len() / arity;
            for (c, (table_idx, reader)) in readers.iter_mut().enumerate() {
                positions.clear();
                for r in 0..chunk_rows {
                    positions.push(chunk[r * arity + *table_idx]);
                }
                reader.read_into(&positions, &mut group.mat[c])?;
            }
            self.tracker
                .alloc((chunk_rows * self.plan.mat_width) as u64);
            self.tracker
                .free((chunk_rows * self.plan.pos_row_width) as u64);
            drop(chunk);
        }
        Ok(())
    }

    /// S2b: materialize only the sort attributes and flatten the group's
    /// positions so both can be permuted together by the sort.
    fn materialize_sort_only(
        &mut self,
        g: usize,
        readers: &mut [(usize, ColumnReader)],
    ) -> Result<()> {
        let arity = self.plan.pos_arity;
        let group = &mut self.groups[g];
        group.mat = self
            .plan
            .mat_attrs
            .iter()
            .map(|a| ColumnData::with_capacity(&a.ty, group.rows))
            .collect();
        group.positions = Vec::with_capacity(group.rows * arity);
        let mut positions = Vec::with_capacity(EXEC_BLOCK_ROWS);
        for chunk in std::mem::take(&mut group.pos_chunks) {
            let chunk_rows = chunk.len() / arity;
            for (c, (table_idx, reader)) in readers.iter_mut().enumerate() {
                positions.clear();
                for r in 0..chunk_rows {
                    positions.push(chunk[r * arity + *table_idx]);
                }
                reader.read_into(&positions, &mut group.mat[c])?;
            }
            self.tracker
                .alloc((chunk_rows * self.plan.mat_width) as u64);
            group.positions.extend_from_slice(&chunk);
        }
        Ok(())
    }

    /// Stable sort of the group payload by the ORDER BY columns; ties keep
    /// arrival order.
    fn sort_group(&mut self, g: usize) {
        if self.plan.order_cols.is_empty() || self.groups[g].rows <= 1 {
            return;
        }
        let group = &mut self.groups[g];
        let perm = sort_permutation(&group.mat, &self.plan.order_cols, group.rows);
        group.mat = group.mat.iter().map(|c| c.permute(&perm)).collect();
        if !group.positions.is_empty() {
            let arity = self.plan.pos_arity;
            let mut sorted = Vec::with_capacity(group.positions.len());
            for &i in &perm {
                let base = i as usize * arity;
                sorted.extend_from_slice(&group.positions[base..base + arity]);
            }
            group.positions = sorted;
        }
    }

    fn emit_group(
        &mut self,
        g: usize,
        func_cols: Vec<ColumnData>,
        pass_readers: &mut [(usize, ColumnReader)],
        out: &mut Vec<TupleBlock>,
    ) -> Result<()> {
        let group = &self.groups[g];
        let rows = group.rows;
        let key_values: Vec<Option<Value>> = self
            .plan
            .pass_sources
            .iter()
            .map(|src| match src {
                PassSource::Key { offset, ty } => Some(decode_value(ty, &group.key, *offset)),
                _ => None,
            })
            .collect();

        let mut start = 0;
        let mut positions = Vec::new();
        while start < rows {
            let end = (start + EXEC_BLOCK_ROWS).min(rows);
            let mut columns = Vec::with_capacity(self.plan.out_schema.len());
            for (p, src) in self.plan.pass_sources.iter().enumerate() {
                let ty = self.plan.out_schema[p].1;
                let mut col = ColumnData::with_capacity(&ty, end - start);
                match src {
                    PassSource::Key { .. } => {
                        let v = key_values[p].as_ref().unwrap();
                        for _ in start..end {
                            col.push_value(v);
                        }
                    }
                    PassSource::Mat(i) => {
                        for r in start..end {
                            col.push_from(&group.mat[*i], r);
                        }
                    }
                    PassSource::OnDemand(i) => {
                        let (table_idx, reader) = &mut pass_readers[*i];
                        positions.clear();
                        for r in start..end {
                            positions.push(group.positions[r * self.plan.pos_arity + *table_idx]);
                        }
                        reader.read_into(&positions, &mut col)?;
                    }
                }
                columns.push(col);
            }
            for (f, src) in func_cols.iter().enumerate() {
                let ty = self.plan.out_schema[self.plan.pass_sources.len() + f].1;
                let mut col = ColumnData::with_capacity(&ty, end - start);
                for r in start..end {
                    col.push_from(src, r);
                }
                columns.push(col);
            }
            self.stats.rows_out += (end - start) as u64;
            out.push(TupleBlock::new(self.plan.out_schema.clone(), columns));
            start = end;
        }
        Ok(())
    }

    fn release_group(&mut self, g: usize) {
        let group = &mut self.groups[g];
        let mut bytes = 0u64;
        for col in &group.mat {
            bytes += col.byte_size();
        }
        bytes += (group.positions.len() * 8) as u64;
        group.mat = Vec::new();
        group.positions = Vec::new();
        self.tracker.free(bytes);
    }

    fn run(mut self, input: WindowInput) -> Result<WindowRun> {
        let tables: Vec<TableHandle> = match &input {
            WindowInput::Positional(op) => op.tables().to_vec(),
            WindowInput::Tuples { .. } => Vec::new(),
        };
        match input {
            WindowInput::Positional(mut op) => self.populate_positional(op.as_mut())?,
            WindowInput::Tuples { blocks, .. } => self.populate_tuples(&blocks)?,
        }
        self.stats.groups = self.groups.len() as u64;
        self.stats.max_group = self.groups.iter().map(|g| g.rows as u64).max().unwrap_or(0);

        let open = |attrs: &[PlanAttr]| -> Result<Vec<(usize, ColumnReader)>> {
            attrs
                .iter()
                .map(|a| match &a.source {
                    AttrSource::Table { table_idx, attr } => {
                        Ok((*table_idx, tables[*table_idx].reader(attr)?))
                    }
                    AttrSource::TupleCol(_) => unreachable!("readers need tables"),
                })
                .collect()
        };
        let mut group_mat_readers = match self.plan.mode {
            PayloadMode::MatPerGroup | PayloadMode::SortOnly => open(&self.plan.mat_attrs)?,
            PayloadMode::MatUpfront => Vec::new(),
        };
        let mut pass_readers = open(&self.plan.ondemand_pass)?;
        let mut s2b = if self.plan.ondemand_aggr.is_empty() {
            None
        } else {
            Some(S2bState::open(self.plan, &tables)?)
        };

        let mut blocks = Vec::new();
        for g in 0..self.groups.len() {
            match self.plan.mode {
                PayloadMode::MatUpfront => {}
                PayloadMode::MatPerGroup => self.materialize_group(g, &mut group_mat_readers)?,
                PayloadMode::SortOnly => self.materialize_sort_only(g, &mut group_mat_readers)?,
            }
            self.sort_group(g);
            if let Some(state) = s2b.as_mut() {
                state.reset_group();
            }
            let func_cols = eval::evaluate_group(
                self.plan,
                &self.groups[g],
                self.algo,
                s2b.as_mut(),
                &mut self.tracker,
                &mut self.stats,
            )?;
            self.emit_group(g, func_cols, &mut pass_readers, &mut blocks)?;
            self.release_group(g);
        }

        if let Some(state) = s2b {
            state.release(&mut self.tracker);
        }
        for _ in &self.groups {
            self.tracker.free(self.plan.key_width as u64);
        }

        self.stats.peak_bytes = self.tracker.peak();
        self.stats.tree_peak_bytes = self.tracker.tree_peak();
        Ok(WindowRun {
            schema: self.plan.out_schema.clone(),
            blocks,
            stats: self.stats,
        })
    }
}

/// Stable ordering permutation over the materialized columns. The common
/// single numeric key sorts as packed (key, arrival) pairs; everything else
/// goes through the generic comparator chain with an arrival-index
/// tie-break.
fn sort_permutation(
    mat: &[ColumnData],
    order_cols: &[(usize, SortDirection)],
    rows: usize,
) -> Vec<u32> {
    if let [(col, dir)] = order_cols {
        // Map f64 to a sort key matching the IEEE total order.
        let total_bits = |x: f64| -> u64 {
            let b = x.to_bits();
            b ^ (((b as i64 >> 63) as u64) | 0x8000_0000_0000_0000)
        };
        match &mat[*col] {
            ColumnData::Int64(v) => {
                let mut pairs: Vec<(i64, u32)> =
                    v.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
                match dir {
                    SortDirection::Asc => pairs.sort_unstable(),
                    SortDirection::Desc => {
                        pairs.sort_unstable_by_key(|&(k, i)| (std::cmp::Reverse(k), i))
                    }
                }
                return pairs.into_iter().map(|(_, i)| i).collect();
            }
            ColumnData::Float64(v) => {
                let mut pairs: Vec<(u64, u32)> = v
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| (total_bits(k), i as u32))
                    .collect();
                match dir {
                    SortDirection::Asc => pairs.sort_unstable(),
                    SortDirection::Desc => {
                        pairs.sort_unstable_by_key(|&(k, i)| (std::cmp::Reverse(k), i))
                    }
                }
                return pairs.into_iter().map(|(_, i)| i).collect();
            }
            ColumnData::Text { .. } => {}
        }
    }
    let mut perm: Vec<u32> = (0..rows as u32).collect();
    perm.sort_unstable_by(|&a, &b| {
        for (col, dir) in order_cols {
            let ord = mat[*col].cmp_rows(a as usize, &mat[*col], b as usize);
            let ord = match dir {
                SortDirection::Asc => ord,
                SortDirection::Desc => ord.reverse(),
            };
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        a.cmp(&b)
    });
    perm
}

/// The window operator: appends the configured function outputs to every
/// input row. Output cardinality equals input cardinality; emission order is
/// group-major with rows in sorted order inside each group (a downstream
/// sort restores any required global order).
pub struct WindowOperator {
    pub spec: WindowSpec,
    pub pass_through: Vec<String>,
    pub algorithm: EvalAlgorithm,
    pub strategy: Strategy,
}

impl WindowOperator {
    pub fn new(
        spec: WindowSpec,
        pass_through: Vec<String>,
        algorithm: EvalAlgorithm,
        strategy: Strategy,
    ) -> WindowOperator {
        WindowOperator {
            spec,
            pass_through,
            algorithm,
            strategy,
        }
    }

    pub fn execute(&self, input: WindowInput) -> Result<WindowRun> {
        let (mode, pos_arity) = match &input {
            WindowInput::Positional(op) => {
                let mode = match self.strategy {
                    Strategy::S1 => PayloadMode::MatUpfront,
                    Strategy::S2a => PayloadMode::MatPerGroup,
                    Strategy::S2b => PayloadMode::SortOnly,
                };
                (mode, op.tables().len())
            }
            // Past the materialization point the input is already tuples;
            // the strategy choice does not apply.
            WindowInput::Tuples { .. } => (PayloadMode::MatUpfront, 0),
        };
        let plan = match &input {
            WindowInput::Positional(op) => {
                let tables = op.tables().to_vec();
                Plan::build(
                    &self.spec,
                    &self.pass_through,
                    mode,
                    &InputSchema::Tables(&tables),
                    pos_arity,
                )?
            }
            WindowInput::Tuples { schema, .. } => Plan::build(
                &self.spec,
                &self.pass_through,
                mode,
                &InputSchema::Tuple(schema),
                pos_arity,
            )?,
        };
        Exec::new(&plan, self.algorithm).run(input)
    }
}
