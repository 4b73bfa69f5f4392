//! The window-function operator.
//!
//! Processing follows the classic three phases: hash partitioning on the
//! PARTITION BY keys, per-group ordering on the ORDER BY keys, then
//! evaluation. Evaluation runs one of three algorithms (naive, cumulative,
//! segment-tree) over one of three materialization strategies for positional
//! input (S1, S2a, S2b); all nine combinations produce identical results.

mod bounds;
mod eval;
mod exec;
mod spec;

pub use bounds::{frame_bounds, range_bound_value, type_max, type_min};
pub use exec::{RunStats, WindowInput, WindowOperator, WindowRun};
pub use spec::{
    output_type, validate_spec, EvalAlgorithm, FrameBound, FrameMode, FrameSpec, FuncKind,
    SortDirection, Strategy, WindowFunc, WindowSpec,
};
