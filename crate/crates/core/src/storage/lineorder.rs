//! Deterministic generator for the benchmark table.
//!
//! The table mimics a slice of the SSB LINEORDER layout:
//! `lo_orderkey` int64 sequential from 1, `lo_orderpriority` one of the five
//! standard priority strings drawn uniformly, `lo_ordtotalprice` int64
//! uniform in [1, 60_000_000]. Rows are produced by a ChaCha8 stream cipher
//! RNG seeded explicitly, so a (rows, seed) pair always yields byte-identical
//! column files. SSB scale factor 1 corresponds to roughly 6,000,000 rows if
//! a scale-comparable table is wanted.

use std::io::Write;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::value::ValueType;

use super::{TableHandle, TableSchema};

pub const LINEORDER_TABLE: &str = "lineorder";

/// The five SSB order priorities, fixed width 15.
pub const LINEORDER_PRIORITIES: [&str; 5] =
    ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"];

pub const PRIORITY_WIDTH: u8 = 15;
pub const TOTALPRICE_MAX: i64 = 60_000_000;

pub fn schema() -> TableSchema {
    TableSchema::new(
        LINEORDER_TABLE,
        &[
            ("lo_orderkey", ValueType::Int64),
            ("lo_orderpriority", ValueType::FixedText(PRIORITY_WIDTH)),
            ("lo_ordtotalprice", ValueType::Int64),
        ],
    )
}

const WRITE_CHUNK: u64 = 8192;

pub(super) fn generate(table: &TableHandle, rows: u64, seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key_out = table.column_writer("lo_orderkey")?;
    let mut prio_out = table.column_writer("lo_orderpriority")?;
    let mut price_out = table.column_writer("lo_ordtotalprice")?;

    let start_key = table.row_count + 1;
    let mut written = 0u64;
    let mut prio_buf = Vec::with_capacity((WRITE_CHUNK * PRIORITY_WIDTH as u64) as usize);
    let mut key_buf = Vec::with_capacity((WRITE_CHUNK * 8) as usize);
    let mut price_buf = Vec::with_capacity((WRITE_CHUNK * 8) as usize);
    while written < rows {
        let chunk = WRITE_CHUNK.min(rows - written);
        key_buf.clear();
        prio_buf.clear();
        price_buf.clear();
        for i in 0..chunk {
            let key = (start_key + written + i) as i64;
            key_buf.extend_from_slice(&key.to_le_bytes());
            let prio = LINEORDER_PRIORITIES[rng.gen_range(0..LINEORDER_PRIORITIES.len())];
            prio_buf.extend_from_slice(prio.as_bytes());
            prio_buf.resize(prio_buf.len() + PRIORITY_WIDTH as usize - prio.len(), 0);
            let price = rng.gen_range(1..=TOTALPRICE_MAX);
            price_buf.extend_from_slice(&price.to_le_bytes());
        }
        key_out.write_all(&key_buf)?;
        prio_out.write_all(&prio_buf)?;
        price_out.write_all(&price_buf)?;
        written += chunk;
    }
    key_out.flush()?;
    prio_out.flush()?;
    price_out.flush()?;
    Ok(rows)
}
