//! Positional value readers over column files.
//!
//! Reads go through a fixed-size block buffer of [`READ_BLOCK_VALUES`]
//! values, so sorted position runs turn into sequential block loads while
//! random probes cost one block load per miss.

use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::Path;

use crate::error::{Error, Result};
use crate::value::{decode_value, ColumnData, Value, ValueType};

use super::{Position, TableHandle};

/// Values per read block (not bytes); the buffer holds block × width bytes.
pub const READ_BLOCK_VALUES: u64 = 4096;

/// Buffered reader for one attribute of one table.
pub struct ColumnReader {
    file: File,
    value_type: ValueType,
    row_count: u64,
    table: String,
    block: Vec<u8>,
    block_index: Option<u64>,
    block_rows: u64,
}

impl ColumnReader {
    pub(super) fn open(
        path: &Path,
        value_type: ValueType,
        row_count: u64,
        table: String,
    ) -> Result<ColumnReader> {
        Ok(ColumnReader {
            file: File::open(path)?,
            value_type,
            row_count,
            table,
            block: Vec::new(),
            block_index: None,
            block_rows: 0,
        })
    }

    pub fn value_type(&self) -> ValueType {
        self.value_type
    }

    pub fn row_count(&self) -> u64 {
        self.row_count
    }

    fn load_block(&mut self, block: u64) -> Result<()> {
        let width = self.value_type.byte_width() as u64;
        let first = block * READ_BLOCK_VALUES;
        let rows = READ_BLOCK_VALUES.min(self.row_count - first);
        let bytes = (rows * width) as usize;
        self.block.resize(bytes, 0);
        self.file.seek(SeekFrom::Start(first * width))?;
        self.file.read_exact(&mut self.block)?;
        self.block_index = Some(block);
        self.block_rows = rows;
        Ok(())
    }

    fn check_position(&self, pos: Position) -> Result<()> {
        if pos >= self.row_count {
            return Err(Error::PositionOutOfRange {
                table: self.table.clone(),
                position: pos,
                rows: self.row_count,
            });
        }
        Ok(())
    }

    /// Value at one position.
    pub fn value_at(&mut self, pos: Position) -> Result<Value> {
        self.check_position(pos)?;
        let block = pos / READ_BLOCK_VALUES;
        if self.block_index != Some(block) {
            self.load_block(block)?;
        }
        let offset = (pos % READ_BLOCK_VALUES) as usize * self.value_type.byte_width();
        Ok(decode_value(&self.value_type, &self.block, offset))
    }

    /// Append the values at `positions` (request order) to a typed buffer.
    pub fn read_into(&mut self, positions: &[Position], out: &mut ColumnData) -> Result<()> {
        let width = self.value_type.byte_width();
        for &pos in positions {
            self.check_position(pos)?;
            let block = pos / READ_BLOCK_VALUES;
            if self.block_index != Some(block) {
                self.load_block(block)?;
            }
            let offset = (pos % READ_BLOCK_VALUES) as usize * width;
            match out {
                ColumnData::Int64(v) => {
                    let mut b = [0u8; 8];
                    b.copy_from_slice(&self.block[offset..offset + 8]);
                    v.push(i64::from_le_bytes(b));
                }
                ColumnData::Float64(v) => {
                    let mut b = [0u8; 8];
                    b.copy_from_slice(&self.block[offset..offset + 8]);
                    v.push(f64::from_le_bytes(b));
                }
                ColumnData::Text { bytes, .. } => {
                    bytes.extend_from_slice(&self.block[offset..offset + width]);
                }
            }
        }
        Ok(())
    }

    /// Read a batch of positions into a fresh buffer.
    pub fn read_column(&mut self, positions: &[Position]) -> Result<ColumnData> {
        let mut out = ColumnData::with_capacity(&self.value_type, positions.len());
        self.read_into(positions, &mut out)?;
        Ok(out)
    }
}

/// Synchronized multi-attribute reader: one tuple per position.
pub struct SyncReader {
    readers: Vec<ColumnReader>,
}

impl SyncReader {
    pub fn open(table: &TableHandle, attrs: &[&str]) -> Result<SyncReader> {
        let readers = attrs
            .iter()
            .map(|a| table.reader(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(SyncReader { readers })
    }

    /// Row i of the output is the tuple (attr1[pos_i], ..., attrK[pos_i]);
    /// identical to zipping the individual column readers.
    pub fn read_tuples(&mut self, positions: &[Position]) -> Result<Vec<Vec<Value>>> {
        let mut out = vec![Vec::with_capacity(self.readers.len()); positions.len()];
        for reader in &mut self.readers {
            for (row, &pos) in positions.iter().enumerate() {
                out[row].push(reader.value_at(pos)?);
            }
        }
        Ok(out)
    }

    /// Columnar variant of [`read_tuples`](Self::read_tuples).
    pub fn read_columns(&mut self, positions: &[Position]) -> Result<Vec<ColumnData>> {
        self.readers
            .iter_mut()
            .map(|r| r.read_column(positions))
            .collect()
    }
}
