//! Memory-model parameter measurement against real tables.

mod common;

use colwin_core::memory::{estimate, measure_params};
use colwin_core::position::scan;
use colwin_core::storage::Database;
use colwin_core::value::{Value, ValueType};
use colwin_core::window::{
    EvalAlgorithm, FrameBound, FrameMode, FrameSpec, FuncKind, SortDirection, Strategy, WindowFunc,
    WindowSpec,
};
use common::{build_table, run_window};
use tempfile::TempDir;

fn lineorder_spec(mode: FrameMode, offset: i64) -> WindowSpec {
    WindowSpec {
        partition_keys: vec!["lo_orderpriority".into()],
        order_keys: vec![("lo_ordtotalprice".into(), SortDirection::Asc)],
        frame: Some(FrameSpec {
            mode,
            start: FrameBound::Preceding(Value::Int64(offset)),
            end: FrameBound::Following(Value::Int64(offset)),
        }),
        functions: vec![WindowFunc {
            kind: FuncKind::Sum,
            attr: Some("lo_ordtotalprice".into()),
            output: "s".into(),
        }],
    }
}

#[test]
fn lineorder_params_count_five_priority_groups() {
    let dir = TempDir::new().unwrap();
    let db = Database::open(dir.path()).unwrap();
    let table = db.create_lineorder(10_000, 21).unwrap();
    let spec = lineorder_spec(FrameMode::Range, 1_000_000);
    let params = measure_params(Box::new(scan(&table, 4096)), &spec).unwrap();
    assert_eq!(params.rows, 10_000);
    assert_eq!(params.groups, 5);
    assert!(params.max_group >= 10_000 / 5);
    assert_eq!(params.key_tuple_bytes, 15);
    assert_eq!(params.sort_aggr_tuple_bytes, 8);
    assert_eq!(params.position_row_bytes, 8);
    // RANGE window size comes from the actual widest frame.
    assert!(params.window_size > 0 && params.window_size <= params.max_group);
}

#[test]
fn single_row_and_empty_tables_measure_degenerate_params() {
    let dir = TempDir::new().unwrap();
    let cols = [("k", ValueType::Int64), ("v", ValueType::Int64)];
    let spec = WindowSpec {
        partition_keys: vec!["k".into()],
        order_keys: vec![("v".into(), SortDirection::Asc)],
        frame: Some(FrameSpec {
            mode: FrameMode::Rows,
            start: FrameBound::Preceding(Value::Int64(1)),
            end: FrameBound::CurrentRow,
        }),
        functions: vec![WindowFunc {
            kind: FuncKind::Sum,
            attr: Some("v".into()),
            output: "s".into(),
        }],
    };

    let single = build_table(
        dir.path(),
        "single",
        &cols,
        &[vec![Value::Int64(1), Value::Int64(2)]],
    );
    let params = measure_params(Box::new(scan(&single, 16)), &spec).unwrap();
    assert_eq!((params.rows, params.groups, params.max_group), (1, 1, 1));

    let empty = build_table(dir.path(), "empty", &cols, &[]);
    let params = measure_params(Box::new(scan(&empty, 16)), &spec).unwrap();
    assert_eq!((params.rows, params.groups, params.max_group), (0, 0, 0));
    assert_eq!(params.window_size, 0);

    // Empty input runs report only fixed structure overhead (none counted).
    let run = run_window(
        &empty,
        &spec,
        &["k"],
        EvalAlgorithm::Cumulative,
        Strategy::S1,
    );
    assert_eq!(run.stats.peak_bytes, 0);
    assert_eq!(run.stats.rows_out, 0);
    // The formulas evaluate to zero on the degenerate input too.
    assert_eq!(estimate(Strategy::S1, &params), 0);
}
