//! Shared helpers for the integration and acceptance suites.

// Each test target compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::path::Path;

use colwin_core::position::{scan, PositionalOperator};
use colwin_core::storage::{Database, TableHandle, TableSchema};
use colwin_core::value::{Value, ValueType};
use colwin_core::window::{
    EvalAlgorithm, Strategy, WindowInput, WindowOperator, WindowRun, WindowSpec,
};

pub const ALGORITHMS: [EvalAlgorithm; 3] = [
    EvalAlgorithm::Naive,
    EvalAlgorithm::Cumulative,
    EvalAlgorithm::SegmentTree,
];

/// Create a table and fill it from in-memory rows (via the CSV loader).
pub fn build_table(
    dir: &Path,
    name: &str,
    columns: &[(&str, ValueType)],
    rows: &[Vec<Value>],
) -> TableHandle {
    let db = Database::open(dir).unwrap();
    db.create_table(&TableSchema::new(name, columns)).unwrap();
    let csv_path = dir.join(format!("{name}.csv"));
    let mut text = String::new();
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    std::fs::write(&csv_path, text).unwrap();
    db.load_csv(name, &csv_path).unwrap();
    db.table(name).unwrap()
}

pub fn run_window(
    table: &TableHandle,
    spec: &WindowSpec,
    pass: &[&str],
    algo: EvalAlgorithm,
    strategy: Strategy,
) -> WindowRun {
    let op = WindowOperator::new(
        spec.clone(),
        pass.iter().map(|s| s.to_string()).collect(),
        algo,
        strategy,
    );
    op.execute(WindowInput::Positional(Box::new(scan(table, 1024))))
        .unwrap()
}

pub fn run_window_on(
    input: Box<dyn PositionalOperator>,
    spec: &WindowSpec,
    pass: &[&str],
    algo: EvalAlgorithm,
    strategy: Strategy,
) -> WindowRun {
    let op = WindowOperator::new(
        spec.clone(),
        pass.iter().map(|s| s.to_string()).collect(),
        algo,
        strategy,
    );
    op.execute(WindowInput::Positional(input)).unwrap()
}

/// Materialize the full table as rows for the oracle.
pub fn table_rows(table: &TableHandle, attrs: &[&str]) -> Vec<Vec<Value>> {
    colwin_core::position::materialize(scan(table, 4096), attrs)
        .unwrap()
        .collect_rows()
        .unwrap()
}

pub fn table_schema(table: &TableHandle, attrs: &[&str]) -> Vec<(String, ValueType)> {
    attrs
        .iter()
        .map(|a| {
            (
                a.to_string(),
                table.schema.attr_type(a).expect("known attribute"),
            )
        })
        .collect()
}
