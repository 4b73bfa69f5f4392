//! Columnar window-function execution core.
//!
//! The crate implements a small disk-based column store operating on
//! positions for as long as possible (late materialization), and on top of
//! it a window-function operator with three evaluation algorithms (naive,
//! cumulative, segment-tree), three materialization strategies, an
//! analytical memory-cost model with matching instrumentation, and a
//! brute-force reference evaluator used as ground truth in tests.

pub mod error;
pub mod memory;
pub mod monoid;
pub mod oracle;
pub mod position;
pub mod segtree;
pub mod storage;
pub mod value;
pub mod window;

pub use error::{Error, Result};
pub use value::{ColumnData, Tuple, Value, ValueType};
