//! Pull-based positional operators.
//!
//! Plans are split in two sections: positional operators exchange
//! [`JoinIndexBlock`]s (arrays of per-table positions), and past the
//! materialization point data flows as [`TupleBlock`]s. Operators follow the
//! Volcano iterator contract with block-oriented `next`: after end-of-stream
//! every further call keeps returning end-of-stream.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::storage::{ColumnReader, Position, TableHandle};
use crate::value::{ColumnData, Value, ValueType};

/// Default logical rows per block.
pub const DEFAULT_BLOCK_SIZE: usize = 4096;

/// Positional intermediate result: `rows × tables` matrix of positions
/// stored row-major, one logical row being one position per joined table.
#[derive(Debug, Clone)]
pub struct JoinIndexBlock {
    tables: Arc<[TableHandle]>,
    arity: usize,
    positions: Vec<Position>,
}

impl JoinIndexBlock {
    pub fn new(tables: Arc<[TableHandle]>, positions: Vec<Position>) -> JoinIndexBlock {
        let arity = tables.len();
        debug_assert!(arity > 0 && positions.len().is_multiple_of(arity));
        JoinIndexBlock {
            tables,
            arity,
            positions,
        }
    }

    pub fn tables(&self) -> &Arc<[TableHandle]> {
        &self.tables
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions of logical row `i`, one per table.
    pub fn row(&self, i: usize) -> &[Position] {
        &self.positions[i * self.arity..(i + 1) * self.arity]
    }

    /// All positions of one table column of the block, in row order.
    pub fn table_positions(&self, table_idx: usize) -> Vec<Position> {
        (0..self.len())
            .map(|i| self.positions[i * self.arity + table_idx])
            .collect()
    }
}

/// A position-producing operator in the pull model.
pub trait PositionalOperator {
    /// The joined tables this operator's blocks refer to.
    fn tables(&self) -> &Arc<[TableHandle]>;

    /// Next block, or `None` at end-of-stream (fused).
    fn next_block(&mut self) -> Result<Option<JoinIndexBlock>>;
}

/// Resolve an attribute name (optionally `table.attr` qualified) against the
/// joined tables of a positional plan.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedAttr {
    pub table_idx: usize,
    pub value_type: ValueType,
}

pub fn resolve_attr(tables: &[TableHandle], name: &str) -> Result<(ResolvedAttr, String)> {
    if let Some((table, attr)) = name.split_once('.') {
        for (i, t) in tables.iter().enumerate() {
            if t.name() == table {
                let ty = t
                    .schema
                    .attr_type(attr)
                    .ok_or_else(|| Error::UnknownAttribute(name.to_string()))?;
                return Ok((
                    ResolvedAttr {
                        table_idx: i,
                        value_type: ty,
                    },
                    attr.to_string(),
                ));
            }
        }
        return Err(Error::UnknownAttribute(name.to_string()));
    }
    let mut found = None;
    for (i, t) in tables.iter().enumerate() {
        if let Some(ty) = t.schema.attr_type(name) {
            if found.is_some() {
                return Err(Error::AmbiguousAttribute(name.to_string()));
            }
            found = Some(ResolvedAttr {
                table_idx: i,
                value_type: ty,
            });
        }
    }
    found
        .map(|r| (r, name.to_string()))
        .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
}

/// Full scan of one table: emits positions 0..row_count-1 in ascending order
/// over a single-table join index.
pub struct ScanOperator {
    tables: Arc<[TableHandle]>,
    row_count: u64,
    cursor: u64,
    block_size: usize,
}

pub fn scan(table: &TableHandle, block_size: usize) -> ScanOperator {
    assert!(block_size >= 1, "block_size must be ≥ 1");
    ScanOperator {
        tables: Arc::from(vec![table.clone()].into_boxed_slice()),
        row_count: table.row_count,
        cursor: 0,
        block_size,
    }
}

impl PositionalOperator for ScanOperator {
    fn tables(&self) -> &Arc<[TableHandle]> {
        &self.tables
    }

    fn next_block(&mut self) -> Result<Option<JoinIndexBlock>> {
        if self.cursor >= self.row_count {
            return Ok(None);
        }
        let end = (self.cursor + self.block_size as u64).min(self.row_count);
        let positions: Vec<Position> = (self.cursor..end).collect();
        self.cursor = end;
        Ok(Some(JoinIndexBlock::new(self.tables.clone(), positions)))
    }
}

/// Synthetic multi-table join index pairing two tables by equal row ordinal.
/// Exists so wide (multi-position) logical rows can be exercised without a
/// join operator; the tables must have equal row counts.
pub struct PairedScanOperator {
    tables: Arc<[TableHandle]>,
    row_count: u64,
    cursor: u64,
    block_size: usize,
}

pub fn paired_scan(
    left: &TableHandle,
    right: &TableHandle,
    block_size: usize,
) -> Result<PairedScanOperator> {
    assert!(block_size >= 1, "block_size must be ≥ 1");
    if left.row_count != right.row_count {
        return Err(Error::Schema(format!(
            "paired scan requires equal row counts ({} vs {})",
            left.row_count, right.row_count
        )));
    }
    Ok(PairedScanOperator {
        tables: Arc::from(vec![left.clone(), right.clone()].into_boxed_slice()),
        row_count: left.row_count,
        cursor: 0,
        block_size,
    })
}

impl PositionalOperator for PairedScanOperator {
    fn tables(&self) -> &Arc<[TableHandle]> {
        &self.tables
    }

    fn next_block(&mut self) -> Result<Option<JoinIndexBlock>> {
        if self.cursor >= self.row_count {
            return Ok(None);
        }
        let end = (self.cursor + self.block_size as u64).min(self.row_count);
        let mut positions = Vec::with_capacity(((end - self.cursor) * 2) as usize);
        for p in self.cursor..end {
            positions.push(p);
            positions.push(p);
        }
        self.cursor = end;
        Ok(Some(JoinIndexBlock::new(self.tables.clone(), positions)))
    }
}

/// Single-attribute comparison predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl CmpOp {
    pub fn parse(s: &str) -> Result<CmpOp> {
        Ok(match s {
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            "=" | "==" => CmpOp::Eq,
            ">=" => CmpOp::Ge,
            ">" => CmpOp::Gt,
            "!=" | "<>" => CmpOp::Ne,
            _ => return Err(Error::Parse(format!("unknown comparison `{s}`"))),
        })
    }

    pub fn eval(&self, lhs: &Value, rhs: &Value) -> bool {
        let ord = lhs.total_cmp(rhs);
        match self {
            CmpOp::Lt => ord.is_lt(),
            CmpOp::Le => ord.is_le(),
            CmpOp::Eq => ord.is_eq(),
            CmpOp::Ge => ord.is_ge(),
            CmpOp::Gt => ord.is_gt(),
            CmpOp::Ne => ord.is_ne(),
        }
    }
}

impl std::fmt::Display for CmpOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Ne => "!=",
        };
        write!(f, "{s}")
    }
}

/// Late-materialization filter: reads only the predicate attribute and
/// passes qualifying logical rows through unchanged, input order preserved.
pub struct FilterOperator<I: PositionalOperator> {
    input: I,
    reader: ColumnReader,
    table_idx: usize,
    op: CmpOp,
    literal: Value,
}

pub fn filter<I: PositionalOperator>(
    input: I,
    attr: &str,
    op: CmpOp,
    literal: Value,
) -> Result<FilterOperator<I>> {
    let (resolved, attr_name) = resolve_attr(input.tables(), attr)?;
    if !literal.matches_type(&resolved.value_type) {
        return Err(Error::TypeMismatch(format!(
            "literal {literal} does not match column `{attr}` of type {}",
            resolved.value_type
        )));
    }
    let reader = input.tables()[resolved.table_idx].reader(&attr_name)?;
    Ok(FilterOperator {
        input,
        reader,
        table_idx: resolved.table_idx,
        op,
        literal,
    })
}

impl<I: PositionalOperator> PositionalOperator for FilterOperator<I> {
    fn tables(&self) -> &Arc<[TableHandle]> {
        self.input.tables()
    }

    fn next_block(&mut self) -> Result<Option<JoinIndexBlock>> {
        // Pull until a block survives the predicate, so callers never see
        // empty interior blocks.
        while let Some(block) = self.input.next_block()? {
            let positions = block.table_positions(self.table_idx);
            let values = self.reader.read_column(&positions)?;
            let mut kept = Vec::new();
            for i in 0..block.len() {
                if self.op.eval(&values.value(i), &self.literal) {
                    kept.extend_from_slice(block.row(i));
                }
            }
            if !kept.is_empty() {
                return Ok(Some(JoinIndexBlock::new(block.tables().clone(), kept)));
            }
        }
        Ok(None)
    }
}

/// Tuple-section block: values stored columnar, exposed row-wise.
#[derive(Debug, Clone)]
pub struct TupleBlock {
    pub schema: Vec<(String, ValueType)>,
    pub columns: Vec<ColumnData>,
}

impl TupleBlock {
    pub fn new(schema: Vec<(String, ValueType)>, columns: Vec<ColumnData>) -> TupleBlock {
        debug_assert_eq!(schema.len(), columns.len());
        TupleBlock { schema, columns }
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(i)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|(n, _)| n == name)
    }
}

/// The materialization point: turns positional blocks into tuple blocks by
/// fetching the requested attributes through synchronized positional reads.
pub struct MaterializeOperator<I: PositionalOperator> {
    input: I,
    schema: Vec<(String, ValueType)>,
    readers: Vec<(usize, ColumnReader)>,
}

pub fn materialize<I: PositionalOperator>(
    input: I,
    attrs: &[&str],
) -> Result<MaterializeOperator<I>> {
    if attrs.is_empty() {
        return Err(Error::Schema("attribute list must be non-empty".into()));
    }
    let mut schema = Vec::with_capacity(attrs.len());
    let mut readers = Vec::with_capacity(attrs.len());
    for name in attrs {
        let (resolved, attr_name) = resolve_attr(input.tables(), name)?;
        schema.push((name.to_string(), resolved.value_type));
        readers.push((
            resolved.table_idx,
            input.tables()[resolved.table_idx].reader(&attr_name)?,
        ));
    }
    Ok(MaterializeOperator {
        input,
        schema,
        readers,
    })
}

impl<I: PositionalOperator> MaterializeOperator<I> {
    pub fn schema(&self) -> &[(String, ValueType)] {
        &self.schema
    }

    pub fn next_block(&mut self) -> Result<Option<TupleBlock>> {
        let Some(block) = self.input.next_block()? else {
            return Ok(None);
        };
        let mut columns = Vec::with_capacity(self.readers.len());
        for (table_idx, reader) in &mut self.readers {
            let positions = block.table_positions(*table_idx);
            columns.push(reader.read_column(&positions)?);
        }
        Ok(Some(TupleBlock::new(self.schema.clone(), columns)))
    }

    /// Drain the stream into memory (tests and the reference oracle path).
    pub fn collect_rows(&mut self) -> Result<Vec<Vec<Value>>> {
        let mut rows = Vec::new();
        while let Some(block) = self.next_block()? {
            for i in 0..block.len() {
                rows.push(block.row(i));
            }
        }
        Ok(rows)
    }
}
