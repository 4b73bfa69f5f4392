//! Black-box tests of the `colwin` binary: exit codes, stream separation,
//! determinism, and the documented CSV shapes.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn colwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colwin"))
        .args(args)
        .env_remove("COLWIN_DATA_DIR")
        .output()
        .expect("spawn colwin")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_query(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const RANGE_QUERY: &str = r#"
table = "lineorder"
select = ["lo_orderpriority", "lo_ordtotalprice"]
sort_by = ["lo_orderpriority", "lo_ordtotalprice"]

[window]
partition_by = ["lo_orderpriority"]
order_by = [{ attr = "lo_ordtotalprice" }]

[window.frame]
mode = "range"
start = { kind = "preceding", offset = 500000 }
end = { kind = "following", offset = 500000 }

[[window.functions]]
kind = "sum"
attr = "lo_ordtotalprice"
output = "sum_price"
"#;

fn gen(dir: &Path, rows: u64, seed: u64) {
    let out = colwin(&[
        "gen",
        "--dir",
        dir.to_str().unwrap(),
        "--rows",
        &rows.to_string(),
        "--seed",
        &seed.to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn gen_reports_row_count_and_zero_rows_succeeds() {
    let dir = TempDir::new().unwrap();
    let out = colwin(&["gen", "--dir", dir.path().to_str().unwrap(), "--rows", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("0 rows"), "{}", stdout(&out));
}

#[test]
fn gen_same_seed_produces_identical_column_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    gen(a.path(), 2000, 7);
    gen(b.path(), 2000, 7);
    for attr in ["lo_orderkey", "lo_orderpriority", "lo_ordtotalprice"] {
        let fa = std::fs::read(a.path().join("lineorder").join(format!("{attr}.col"))).unwrap();
        let fb = std::fs::read(b.path().join("lineorder").join(format!("{attr}.col"))).unwrap();
        assert_eq!(fa, fb, "{attr} differs across identical seeds");
    }
}

#[test]
fn run_with_oracle_passes_on_the_reference_query_shape() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 10_000, 3);
    let query = write_query(dir.path(), "q.toml", RANGE_QUERY);
    for algo in ["naive", "cumulative", "segment-tree"] {
        for strategy in ["s1", "s2a", "s2b"] {
            let out = colwin(&[
                "run",
                "--dir",
                dir.path().to_str().unwrap(),
                "--query",
                &query,
                "--algo",
                algo,
                "--strategy",
                strategy,
                "--oracle",
            ]);
            assert!(out.status.success(), "{algo}/{strategy}: {}", stderr(&out));
            assert!(stderr(&out).contains("oracle check passed"));
            // Header plus one row per input row.
            assert_eq!(stdout(&out).lines().count(), 10_001, "{algo}/{strategy}");
        }
    }
}

#[test]
fn run_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 5_000, 9);
    let query = write_query(dir.path(), "q.toml", RANGE_QUERY);
    let args = [
        "run",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
    ];
    let first = colwin(&args);
    let second = colwin(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn malformed_frame_is_rejected_naming_the_rule() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 10, 1);
    let query = write_query(
        dir.path(),
        "bad.toml",
        r#"
table = "lineorder"
select = ["lo_orderpriority"]

[window]
partition_by = ["lo_orderpriority"]
order_by = [{ attr = "lo_ordtotalprice" }]

[window.frame]
mode = "rows"
start = { kind = "following", offset = 3 }
end = { kind = "current_row" }

[[window.functions]]
kind = "sum"
attr = "lo_ordtotalprice"
output = "s"
"#,
    );
    let out = colwin(&[
        "run",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("frame start bound"),
        "stderr: {}",
        stderr(&out)
    );
    assert!(stdout(&out).is_empty());
}

#[test]
fn cumulative_min_uses_the_ordered_multiset_path() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 3_000, 5);
    let query = write_query(
        dir.path(),
        "min.toml",
        r#"
table = "lineorder"
select = ["lo_orderkey"]
sort_by = ["lo_orderkey"]

[window]
partition_by = ["lo_orderpriority"]
order_by = [{ attr = "lo_ordtotalprice" }]

[window.frame]
mode = "rows"
start = { kind = "preceding", offset = 10 }
end = { kind = "following", offset = 10 }

[[window.functions]]
kind = "min"
attr = "lo_ordtotalprice"
output = "m"
"#,
    );
    let out = colwin(&[
        "run",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
        "--algo",
        "cumulative",
        "--oracle",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn bench_emits_one_row_per_configuration_per_repetition() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 2_000, 2);
    let query = write_query(dir.path(), "q.toml", RANGE_QUERY);
    let out = colwin(&[
        "bench",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
        "--offsets",
        "10,1000",
        "--algos",
        "naive,segment-tree",
        "--strategies",
        "s1",
        "--reps",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "offset,algorithm,strategy,rows_processed,wall_ms,combine_ops,peak_bytes"
    );
    // 2 offsets × 2 algorithms × 1 strategy × 1 rep.
    assert_eq!(lines.count(), 4);

    let out = colwin(&[
        "bench",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
        "--offsets",
        "10",
        "--reps",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn bench_rejects_unknown_algorithm_listing_valid_names() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 100, 1);
    let query = write_query(dir.path(), "q.toml", RANGE_QUERY);
    let out = colwin(&[
        "bench",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
        "--offsets",
        "10",
        "--algos",
        "quantum",
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("quantum") && err.contains("naive"), "{err}");
}

#[test]
fn estimate_mem_lists_strategies_and_measure_adds_a_column() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 3_000, 4);
    let query = write_query(dir.path(), "q.toml", RANGE_QUERY);
    let base = colwin(&[
        "estimate-mem",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
    ]);
    assert!(base.status.success(), "{}", stderr(&base));
    let text = stdout(&base);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "strategy,predicted_bytes");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("s1,"));
    assert!(lines[2].starts_with("s2a,"));
    assert!(lines[3].starts_with("s2b,"));

    let measured = colwin(&[
        "estimate-mem",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
        "--measure",
        "--algo",
        "cumulative",
    ]);
    assert!(measured.status.success());
    let text = stdout(&measured);
    assert!(text.lines().next().unwrap() == "strategy,predicted_bytes,measured_bytes");
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').count(), 3, "{line}");
    }
}

#[test]
fn estimate_mem_predicts_s2a_below_s1_for_wide_aggregates() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), 2_000, 6);
    // Aggregates over three attributes (8+8+15 bytes) against an 8-byte
    // position row.
    let query = write_query(
        dir.path(),
        "wide.toml",
        r#"
table = "lineorder"
select = ["lo_orderkey"]

[window]
partition_by = ["lo_orderpriority"]
order_by = [{ attr = "lo_ordtotalprice" }]

[window.frame]
mode = "rows"
start = { kind = "preceding", offset = 20 }
end = { kind = "following", offset = 20 }

[[window.functions]]
kind = "sum"
attr = "lo_ordtotalprice"
output = "s"

[[window.functions]]
kind = "min"
attr = "lo_orderkey"
output = "mk"

[[window.functions]]
kind = "max"
attr = "lo_orderpriority"
output = "mp"
"#,
    );
    let out = colwin(&[
        "estimate-mem",
        "--dir",
        dir.path().to_str().unwrap(),
        "--query",
        &query,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let predicted = |name: &str| -> u64 {
        text.lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(predicted("s2a") < predicted("s1"), "{text}");
}

#[test]
fn missing_dir_is_an_error_and_env_var_is_honored() {
    let out = colwin(&["gen", "--rows", "1"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("COLWIN_DATA_DIR"));

    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_colwin"))
        .args(["gen", "--rows", "50", "--seed", "1"])
        .env("COLWIN_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir
        .path()
        .join("lineorder")
        .join("lo_orderkey.col")
        .exists());
}
