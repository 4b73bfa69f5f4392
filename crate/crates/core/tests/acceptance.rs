//! Acceptance suite: the release gate for the engine.
//!
//! Six criteria run sequentially (timing-sensitive ones must not share the
//! machine with sibling tests) and one PASS/FAIL line is printed per
//! criterion. Run with `cargo test -p colwin-core --test acceptance --
//! --nocapture` to see the lines as they complete.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use colwin_core::memory::{estimate, measure_params, MemoryModelParams};
use colwin_core::monoid::{compose, make_monoid, MonoidKind};
use colwin_core::oracle::{oracle_evaluate, results_match};
use colwin_core::position::scan;
use colwin_core::segtree::{FrameQueryRange, FrameQueryRows, SegmentTree};
use colwin_core::storage::Database;
use colwin_core::value::{ColumnData, Value, ValueType};
use colwin_core::window::{
    EvalAlgorithm, FrameBound, FrameMode, FrameSpec, FuncKind, SortDirection, Strategy, WindowFunc,
    WindowSpec,
};
use common::{build_table, run_window, table_rows, table_schema, ALGORITHMS};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> String)> = vec![
        (
            "criterion 1 (oracle equivalence, 9 configurations)",
            c1_oracle_equivalence,
        ),
        (
            "criterion 2 (segment-tree property suite)",
            c2_segment_tree_properties,
        ),
        (
            "criterion 3 (cumulative-sum work bound)",
            c3_cumulative_work_bound,
        ),
        (
            "criterion 4 (performance trend over offsets)",
            c4_performance_trend,
        ),
        ("criterion 5 (memory-model validation)", c5_memory_model),
        (
            "criterion 6 (cardinality and pass-through)",
            c6_cardinality_pass_through,
        ),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(err) => {
                let msg = err
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| err.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                println!("FAIL {name}: {msg}");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

// ---------------------------------------------------------------------------
// Criterion 1: randomized oracle equivalence across 3 algorithms × 3
// strategies, plus the cardinality / pass-through contract on every run.
// ---------------------------------------------------------------------------

struct Instance {
    columns: Vec<(&'static str, ValueType)>,
    rows: Vec<Vec<Value>>,
    spec: WindowSpec,
}

fn gen_instance(rng: &mut ChaCha8Rng, idx: usize) -> Instance {
    let n = match idx % 52 {
        0 => rng.gen_range(2_500..=10_000),
        1..=5 => rng.gen_range(400..=2_500),
        _ => rng.gen_range(1..=400),
    };
    let groups = rng.gen_range(1..=64).min(n);
    let float_ord = rng.gen_bool(0.4);
    let ord_ty = if float_ord {
        ValueType::Float64
    } else {
        ValueType::Int64
    };
    let columns = vec![
        ("k", ValueType::Int64),
        ("ord", ord_ty),
        ("vi", ValueType::Int64),
        ("vf", ValueType::Float64),
    ];
    let ord_spread = (n as i64 / 2).max(1);
    let rows: Vec<Vec<Value>> = (0..n)
        .map(|_| {
            let ord = if float_ord {
                // Multiples of 0.5 keep offset arithmetic exact and give
                // genuine peers.
                Value::Float64(rng.gen_range(0..=2 * ord_spread) as f64 * 0.5)
            } else {
                Value::Int64(rng.gen_range(0..=ord_spread))
            };
            vec![
                Value::Int64(rng.gen_range(0..groups as i64)),
                ord,
                Value::Int64(rng.gen_range(-1_000_000..=1_000_000)),
                Value::Float64(rng.gen_range(0.5..1000.0)),
            ]
        })
        .collect();

    let mode = if rng.gen_bool(0.5) {
        FrameMode::Rows
    } else {
        FrameMode::Range
    };
    // Big instances stick to narrow frames so the naive algorithm and the
    // oracle stay inside the runtime budget.
    let narrow_only = n > 1_500;
    let offset = |rng: &mut ChaCha8Rng| -> Value {
        let large = !narrow_only && rng.gen_bool(0.15);
        match mode {
            FrameMode::Rows => Value::Int64(if large {
                n as i64
            } else {
                rng.gen_range(0..=8)
            }),
            FrameMode::Range => {
                if float_ord {
                    Value::Float64(if large {
                        ord_spread as f64
                    } else {
                        rng.gen_range(0..=12) as f64 * 0.5
                    })
                } else {
                    Value::Int64(if large {
                        ord_spread
                    } else {
                        rng.gen_range(0..=12)
                    })
                }
            }
        }
    };
    let start = match if narrow_only {
        rng.gen_range(1..=2)
    } else {
        rng.gen_range(0..=2)
    } {
        0 => FrameBound::UnboundedPreceding,
        1 => FrameBound::Preceding(offset(rng)),
        _ => FrameBound::CurrentRow,
    };
    let end = match if narrow_only {
        rng.gen_range(0..=1)
    } else {
        rng.gen_range(0..=2)
    } {
        0 => FrameBound::CurrentRow,
        1 => FrameBound::Following(offset(rng)),
        _ => FrameBound::UnboundedFollowing,
    };

    let func_count = rng.gen_range(1..=3);
    let mut functions = Vec::new();
    for f in 0..func_count {
        let output = format!("o{f}");
        let func = match mode {
            FrameMode::Range => match rng.gen_range(0..4) {
                0 => WindowFunc {
                    kind: FuncKind::Sum,
                    attr: Some("ord".into()),
                    output,
                },
                1 => WindowFunc {
                    kind: FuncKind::Min,
                    attr: Some("ord".into()),
                    output,
                },
                2 => WindowFunc {
                    kind: FuncKind::Max,
                    attr: Some("ord".into()),
                    output,
                },
                _ => WindowFunc {
                    kind: FuncKind::Count,
                    attr: None,
                    output,
                },
            },
            FrameMode::Rows => match rng.gen_range(0..7) {
                0 => WindowFunc {
                    kind: FuncKind::Sum,
                    attr: Some("vi".into()),
                    output,
                },
                1 => WindowFunc {
                    kind: FuncKind::Sum,
                    attr: Some("vf".into()),
                    output,
                },
                2 => WindowFunc {
                    kind: FuncKind::Min,
                    attr: Some("vi".into()),
                    output,
                },
                3 => WindowFunc {
                    kind: FuncKind::Max,
                    attr: Some("vi".into()),
                    output,
                },
                4 => WindowFunc {
                    kind: FuncKind::Min,
                    attr: Some("vf".into()),
                    output,
                },
                5 => WindowFunc {
                    kind: FuncKind::Max,
                    attr: Some("vf".into()),
                    output,
                },
                _ => WindowFunc {
                    kind: FuncKind::Count,
                    attr: None,
                    output,
                },
            },
        };
        functions.push(func);
    }

    let order_keys = match mode {
        FrameMode::Range => {
            let mut keys = vec![("ord".to_string(), SortDirection::Asc)];
            if rng.gen_bool(0.3) {
                keys.push(("vi".to_string(), SortDirection::Desc));
            }
            keys
        }
        FrameMode::Rows => {
            if rng.gen_bool(0.1) {
                Vec::new()
            } else {
                let dir = if rng.gen_bool(0.5) {
                    SortDirection::Asc
                } else {
                    SortDirection::Desc
                };
                let mut keys = vec![("ord".to_string(), dir)];
                if rng.gen_bool(0.25) {
                    keys.push(("vi".to_string(), SortDirection::Asc));
                }
                keys
            }
        }
    };

    Instance {
        columns,
        rows,
        spec: WindowSpec {
            partition_keys: vec!["k".into()],
            order_keys,
            frame: Some(FrameSpec { mode, start, end }),
            functions,
        },
    }
}

fn bound_tag(b: &FrameBound) -> &'static str {
    match b {
        FrameBound::UnboundedPreceding => "up",
        FrameBound::Preceding(_) => "prec",
        FrameBound::CurrentRow => "cur",
        FrameBound::Following(_) => "foll",
        FrameBound::UnboundedFollowing => "uf",
    }
}

fn check_instance(instance: &Instance, dir: &TempDir) {
    const PASS: [&str; 4] = ["k", "ord", "vi", "vf"];
    let table = build_table(dir.path(), "t", &instance.columns, &instance.rows);
    let schema = table_schema(&table, &PASS);
    let input_rows = table_rows(&table, &PASS);
    let oracle = oracle_evaluate(&input_rows, &schema, &instance.spec, &PASS)
        .unwrap()
        .flat_rows();

    let mut input_pass_multiset: Vec<Vec<Value>> = input_rows.clone();
    input_pass_multiset.sort();

    for algo in ALGORITHMS {
        for strategy in Strategy::all() {
            let run = run_window(&table, &instance.spec, &PASS, algo, strategy);
            // Criterion 6 contract, enforced on every configuration.
            assert_eq!(
                run.stats.rows_out,
                run.stats.rows_in,
                "cardinality {} {}",
                algo.name(),
                strategy.name()
            );
            assert_eq!(run.row_count(), instance.rows.len());
            let out_rows = run.rows();
            let mut pass_multiset: Vec<Vec<Value>> =
                out_rows.iter().map(|r| r[..PASS.len()].to_vec()).collect();
            pass_multiset.sort();
            assert_eq!(
                pass_multiset,
                input_pass_multiset,
                "pass-through multiset changed under {} {}",
                algo.name(),
                strategy.name()
            );
            results_match(&out_rows, &oracle, 1e-9).unwrap_or_else(|e| {
                panic!(
                    "{} {} disagrees with oracle: {e}",
                    algo.name(),
                    strategy.name()
                )
            });
        }
    }
}

fn c1_oracle_equivalence() -> String {
    const INSTANCES: usize = 520;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut pairs_seen: HashSet<(FrameMode, &'static str, &'static str)> = HashSet::new();
    let mut kinds_seen: HashSet<&'static str> = HashSet::new();
    let mut arities_seen: HashSet<usize> = HashSet::new();
    let mut total_rows = 0usize;
    for idx in 0..INSTANCES {
        let instance = gen_instance(&mut rng, idx);
        let frame = instance.spec.frame.as_ref().unwrap();
        pairs_seen.insert((frame.mode, bound_tag(&frame.start), bound_tag(&frame.end)));
        for f in &instance.spec.functions {
            kinds_seen.insert(f.kind.name());
            if f.kind == FuncKind::Sum {
                let float = f.attr.as_deref() == Some("vf")
                    || (f.attr.as_deref() == Some("ord")
                        && instance.columns[1].1 == ValueType::Float64);
                kinds_seen.insert(if float { "sum_f64" } else { "sum_i64" });
            }
        }
        arities_seen.insert(instance.spec.functions.len());
        total_rows += instance.rows.len();
        let dir = TempDir::new().unwrap();
        check_instance(&instance, &dir);
    }
    // All nine legal bound-kind pairs in both framing modes.
    for mode in [FrameMode::Rows, FrameMode::Range] {
        for start in ["up", "prec", "cur"] {
            for end in ["cur", "foll", "uf"] {
                assert!(
                    pairs_seen.contains(&(mode, start, end)),
                    "bound pair ({start},{end}) unseen for {mode:?}"
                );
            }
        }
    }
    for kind in ["sum", "min", "max", "count", "sum_f64", "sum_i64"] {
        assert!(kinds_seen.contains(kind), "monoid {kind} unseen");
    }
    assert!(
        arities_seen.contains(&2) && arities_seen.contains(&3),
        "products unseen"
    );
    format!("{INSTANCES} instances ({total_rows} total rows) × 9 configurations, all equal to the oracle")
}

// ---------------------------------------------------------------------------
// Criterion 2: deterministic segment-tree properties.
// ---------------------------------------------------------------------------

fn c2_segment_tree_properties() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(17);

    // (a) monoid laws on 10^4 sampled triples per monoid.
    let mut law_checks = 0u64;
    for kind in [
        MonoidKind::SumI64,
        MonoidKind::SumF64,
        MonoidKind::Min,
        MonoidKind::Max,
        MonoidKind::Count,
    ] {
        let ty = if kind == MonoidKind::SumF64 {
            ValueType::Float64
        } else {
            ValueType::Int64
        };
        let m = make_monoid(kind, ty).unwrap();
        for _ in 0..10_000 {
            let sample = |rng: &mut ChaCha8Rng| -> Vec<Value> {
                vec![match kind {
                    MonoidKind::SumF64 => Value::Float64(rng.gen_range(0.5..1000.0)),
                    _ => Value::Int64(rng.gen_range(-1_000_000..=1_000_000)),
                }]
            };
            let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
            assert_eq!(m.combine(&m.identity(), &a), a, "left identity ({kind:?})");
            assert_eq!(m.combine(&a, &m.identity()), a, "right identity ({kind:?})");
            let left = m.combine(&m.combine(&a, &b), &c);
            let right = m.combine(&a, &m.combine(&b, &c));
            if kind == MonoidKind::SumF64 {
                // Float addition reorders with bounded roundoff; checked
                // within relative 1e-9 and documented as approximate.
                let (l, r) = (left[0].as_f64().unwrap(), right[0].as_f64().unwrap());
                assert!(
                    (l - r).abs() <= 1e-9 * l.abs().max(r.abs()),
                    "assoc {l} vs {r}"
                );
            } else {
                assert_eq!(left, right, "associativity ({kind:?})");
            }
            law_checks += 1;
        }
    }

    // (b) ROWS queries ≡ slice folds for every (l, r) pair, all stated
    // sizes, with the node-visit bound checked per query (d).
    let kind_sets: Vec<Vec<MonoidKind>> = vec![
        vec![MonoidKind::SumI64],
        vec![MonoidKind::Min],
        vec![MonoidKind::Max],
        vec![MonoidKind::Count],
        vec![MonoidKind::SumI64, MonoidKind::Min, MonoidKind::Count],
    ];
    let sizes: Vec<usize> = (1..=64).chain([100, 1000, 1023, 1024, 1025]).collect();
    let mut rows_queries = 0u64;
    for &n in &sizes {
        let vals: Vec<i64> = (0..n)
            .map(|_| rng.gen_range(-1_000_000..=1_000_000))
            .collect();
        let height = (usize::BITS - (n - 1).leading_zeros()) as u64;
        let visit_bound = 4 * height + 4;
        for kinds in &kind_sets {
            let leaves: Vec<Vec<Value>> = vals
                .iter()
                .map(|v| {
                    kinds
                        .iter()
                        .map(|k| Value::Int64(if *k == MonoidKind::Count { 1 } else { *v }))
                        .collect()
                })
                .collect();
            let monoid = compose(
                &kinds
                    .iter()
                    .map(|k| make_monoid(*k, ValueType::Int64).unwrap())
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let tree = SegmentTree::build(monoid, &leaves).unwrap();
            for l in 0..n {
                // Incremental sequential fold, independent of the tree.
                let mut sum = 0i64;
                let mut min = i64::MAX;
                let mut max = i64::MIN;
                let mut count = 0i64;
                for r in l..n {
                    sum += vals[r];
                    min = min.min(vals[r]);
                    max = max.max(vals[r]);
                    count += 1;
                    let (got, visits) = tree.evaluate_frame_rows_counting(FrameQueryRows {
                        f_left: l as i64,
                        f_right: r as i64,
                    });
                    assert!(visits <= visit_bound, "n={n} l={l} r={r}: {visits} visits");
                    for (slot, kind) in got.iter().zip(kinds) {
                        let expect = match kind {
                            MonoidKind::SumI64 => sum,
                            MonoidKind::Min => min,
                            MonoidKind::Max => max,
                            MonoidKind::Count => count,
                            MonoidKind::SumF64 => unreachable!(),
                        };
                        assert_eq!(slot.as_i64().unwrap(), expect, "n={n} l={l} r={r} {kind:?}");
                    }
                    rows_queries += 1;
                }
            }
        }
    }

    // (c) RANGE queries ≡ filter-and-fold over sorted arrays with duplicate
    // blocks, visit bound again checked per query.
    let mut range_queries = 0u64;
    for case in 0..6 {
        let mut vals: Vec<i64> = Vec::new();
        if case == 0 {
            vals = vec![7; 64];
        } else {
            let mut v = rng.gen_range(-40..-20);
            while vals.len() < 500 {
                let run = rng.gen_range(1..=12);
                vals.extend(std::iter::repeat_n(v, run));
                v += rng.gen_range(1..=4);
            }
        }
        let n = vals.len();
        let height = (usize::BITS - (n - 1).leading_zeros()) as u64;
        let visit_bound = 4 * height + 4;
        let monoid = compose(&[
            make_monoid(MonoidKind::SumI64, ValueType::Int64).unwrap(),
            make_monoid(MonoidKind::Count, ValueType::Int64).unwrap(),
        ])
        .unwrap();
        let leaves: Vec<Vec<Value>> = vals
            .iter()
            .map(|v| vec![Value::Int64(*v), Value::Int64(1)])
            .collect();
        let tree =
            SegmentTree::build_keyed(monoid, ColumnData::Int64(vals.clone()), &leaves).unwrap();
        let mut candidates: Vec<i64> = vals.clone();
        candidates.dedup();
        let lo_edge = vals[0] - 3;
        let hi_edge = vals[n - 1] + 3;
        candidates.push(lo_edge);
        candidates.push(hi_edge);
        for &lo in &candidates {
            for &hi in &candidates {
                let (got, visits) = tree.evaluate_frame_range_counting(&FrameQueryRange {
                    f_left: Value::Int64(lo),
                    f_right: Value::Int64(hi),
                });
                assert!(visits <= visit_bound, "range case {case}: {visits} visits");
                let qualifying: Vec<i64> = vals
                    .iter()
                    .copied()
                    .filter(|v| lo <= *v && *v <= hi)
                    .collect();
                assert_eq!(got[0].as_i64().unwrap(), qualifying.iter().sum::<i64>());
                assert_eq!(got[1].as_i64().unwrap(), qualifying.len() as i64);
                range_queries += 1;
            }
        }
    }

    format!(
        "{law_checks} law triples, {rows_queries} exhaustive ROWS queries, {range_queries} RANGE queries, visit bound 4·⌈log₂ n⌉+4 held"
    )
}

// ---------------------------------------------------------------------------
// Criterion 3: cumulative SUM work bound on a million-row run.
// ---------------------------------------------------------------------------

fn c3_cumulative_work_bound() -> String {
    const ROWS: u64 = 1_000_000;
    const HALF_WINDOW: i64 = 100;
    let dir = TempDir::new().unwrap();
    let db = Database::open(dir.path()).unwrap();
    let table = db.create_lineorder(ROWS, 11).unwrap();
    let spec = WindowSpec {
        partition_keys: vec!["lo_orderpriority".into()],
        order_keys: vec![("lo_ordtotalprice".into(), SortDirection::Asc)],
        frame: Some(FrameSpec {
            mode: FrameMode::Rows,
            start: FrameBound::Preceding(Value::Int64(HALF_WINDOW)),
            end: FrameBound::Following(Value::Int64(HALF_WINDOW)),
        }),
        functions: vec![WindowFunc {
            kind: FuncKind::Sum,
            attr: Some("lo_ordtotalprice".into()),
            output: "s".into(),
        }],
    };
    let pass = ["lo_orderpriority"];

    let cumulative = run_window(
        &table,
        &spec,
        &pass,
        EvalAlgorithm::Cumulative,
        Strategy::S1,
    );
    assert_eq!(cumulative.stats.rows_out, ROWS);
    assert!(
        cumulative.stats.combine_ops <= 2 * ROWS,
        "cumulative ops {} exceed 2 per row",
        cumulative.stats.combine_ops
    );

    // With one fixed border a single operation per row suffices.
    let fixed_spec = WindowSpec {
        frame: Some(FrameSpec {
            mode: FrameMode::Rows,
            start: FrameBound::UnboundedPreceding,
            end: FrameBound::CurrentRow,
        }),
        ..spec.clone()
    };
    let fixed = run_window(
        &table,
        &fixed_spec,
        &pass,
        EvalAlgorithm::Cumulative,
        Strategy::S1,
    );
    assert!(
        fixed.stats.combine_ops <= ROWS,
        "fixed-border cumulative ops {} exceed 1 per row",
        fixed.stats.combine_ops
    );

    let naive = run_window(&table, &spec, &pass, EvalAlgorithm::Naive, Strategy::S1);
    // Interior rows have the full window; the naive fold costs at least
    // window_size − 1 combines on each of them.
    let window = (2 * HALF_WINDOW + 1) as u64;
    let mut group_sizes = std::collections::HashMap::new();
    for row in table_rows(&table, &["lo_orderpriority"]) {
        *group_sizes.entry(row[0].clone()).or_insert(0u64) += 1;
    }
    let interior: u64 = group_sizes
        .values()
        .map(|&g| g.saturating_sub(window - 1))
        .sum();
    assert!(interior > 0);
    assert!(
        naive.stats.combine_ops >= (window - 1) * interior,
        "naive ops {} below (window−1)·interior = {}",
        naive.stats.combine_ops,
        (window - 1) * interior
    );
    format!(
        "10^6 rows: cumulative {} ops (≤2/row), fixed border {} ops (≤1/row), naive {} ops (≥{}·interior)",
        cumulative.stats.combine_ops,
        fixed.stats.combine_ops,
        naive.stats.combine_ops,
        window - 1
    )
}

// ---------------------------------------------------------------------------
// Criterion 4: wall-time trend over the offset sweep.
// ---------------------------------------------------------------------------

fn c4_performance_trend() -> String {
    const ROWS: u64 = 1_000_000;
    let dir = TempDir::new().unwrap();
    let db = Database::open(dir.path()).unwrap();
    let table = db.create_lineorder(ROWS, 4).unwrap();
    let offsets = [10i64, 1_000, 100_000];
    let spec_for = |offset: i64| WindowSpec {
        partition_keys: vec!["lo_orderpriority".into()],
        order_keys: vec![("lo_ordtotalprice".into(), SortDirection::Asc)],
        frame: Some(FrameSpec {
            mode: FrameMode::Range,
            start: FrameBound::Preceding(Value::Int64(offset)),
            end: FrameBound::Following(Value::Int64(offset)),
        }),
        functions: vec![WindowFunc {
            kind: FuncKind::Sum,
            attr: Some("lo_ordtotalprice".into()),
            output: "sum".into(),
        }],
    };
    let pass = ["lo_orderpriority"];
    // The work gap between nearby offsets is a few percent of the wall
    // time, so repetitions are interleaved across configurations (cancels
    // machine drift) and each configuration reports its fastest
    // post-warm-up repetition (cancels one-off spikes). Repetition 0 is
    // the untimed warm-up.
    const REPS: usize = 5;
    let algos = [EvalAlgorithm::SegmentTree, EvalAlgorithm::Naive];
    let mut samples = [
        [Vec::<f64>::new(), Vec::new(), Vec::new()],
        [Vec::new(), Vec::new(), Vec::new()],
    ];
    for rep in 0..REPS {
        for (a, &algo) in algos.iter().enumerate() {
            for (o, &offset) in offsets.iter().enumerate() {
                let spec = spec_for(offset);
                let start = Instant::now();
                let run = run_window(&table, &spec, &pass, algo, Strategy::S1);
                assert_eq!(run.stats.rows_out, ROWS);
                if rep > 0 {
                    samples[a][o].push(start.elapsed().as_secs_f64() * 1e3);
                }
            }
        }
    }
    let best =
        |a: usize, o: usize| -> f64 { samples[a][o].iter().cloned().fold(f64::MAX, f64::min) };
    let tree_ms: Vec<f64> = (0..3).map(|o| best(0, o)).collect();
    let naive_ms: Vec<f64> = (0..3).map(|o| best(1, o)).collect();

    let tree_max = tree_ms.iter().cloned().fold(f64::MIN, f64::max);
    let tree_min = tree_ms.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        tree_max <= 2.0 * tree_min,
        "segment-tree sweep varies more than 2×: {tree_ms:?}"
    );
    assert!(
        naive_ms[0] < naive_ms[1] && naive_ms[1] < naive_ms[2],
        "naive not monotone over offsets: {naive_ms:?}"
    );
    assert!(
        naive_ms[2] >= 5.0 * tree_ms[2],
        "naive at offset 10^5 only {:.2}× segment-tree ({:.1}ms vs {:.1}ms)",
        naive_ms[2] / tree_ms[2],
        naive_ms[2],
        tree_ms[2]
    );
    format!(
        "segment-tree {:?} ms (≤2× spread), naive {:?} ms (monotone, {:.1}× at 10^5)",
        tree_ms.iter().map(|v| v.round()).collect::<Vec<_>>(),
        naive_ms.iter().map(|v| v.round()).collect::<Vec<_>>(),
        naive_ms[2] / tree_ms[2]
    )
}

// ---------------------------------------------------------------------------
// Criterion 5: memory-model validation on the constructed workload.
// ---------------------------------------------------------------------------

fn c5_memory_model() -> String {
    const N: usize = 100_000;
    let dir = TempDir::new().unwrap();
    // 5 groups; aggregate tuple 4 × 8 = 32 bytes ≥ 4 × the 8-byte position.
    let rows: Vec<Vec<Value>> = (0..N)
        .map(|i| {
            let i = i as i64;
            vec![
                Value::Int64(i % 5),
                Value::Int64((i * 7919) % 104_729),
                Value::Int64(i),
                Value::Int64(i ^ 0x55),
                Value::Int64(i * 3),
                Value::Int64(-i),
            ]
        })
        .collect();
    let table = build_table(
        dir.path(),
        "mem",
        &[
            ("k", ValueType::Int64),
            ("ord", ValueType::Int64),
            ("a", ValueType::Int64),
            ("b", ValueType::Int64),
            ("c", ValueType::Int64),
            ("d", ValueType::Int64),
        ],
        &rows,
    );
    let spec = WindowSpec {
        partition_keys: vec!["k".into()],
        order_keys: vec![("ord".into(), SortDirection::Asc)],
        frame: Some(FrameSpec {
            mode: FrameMode::Rows,
            start: FrameBound::Preceding(Value::Int64(50)),
            end: FrameBound::Following(Value::Int64(50)),
        }),
        functions: ["a", "b", "c", "d"]
            .iter()
            .map(|a| WindowFunc {
                kind: FuncKind::Sum,
                attr: Some((*a).into()),
                output: format!("s_{a}"),
            })
            .collect(),
    };

    let params = measure_params(Box::new(scan(&table, 4096)), &spec).unwrap();
    assert_eq!(
        params,
        MemoryModelParams {
            rows: N as u64,
            groups: 5,
            max_group: N as u64 / 5,
            key_tuple_bytes: 8,
            sort_aggr_tuple_bytes: 40,
            position_row_bytes: 8,
            sort_tuple_bytes: 8,
            aggr_tuple_bytes: 32,
            window_size: 101,
        }
    );
    let est: Vec<u64> = Strategy::all()
        .iter()
        .map(|s| estimate(*s, &params))
        .collect();
    let (e1, e2a, e2b) = (est[0], est[1], est[2]);
    assert!(
        e2b <= e2a && e2a < e1,
        "predicted ordering violated: {est:?}"
    );

    let peak = |s: Strategy| {
        run_window(&table, &spec, &["k"], EvalAlgorithm::Cumulative, s)
            .stats
            .peak_bytes
    };
    let (m1, m2a, m2b) = (peak(Strategy::S1), peak(Strategy::S2a), peak(Strategy::S2b));
    assert!(m2a < m1, "measured S2a {m2a} !< S1 {m1}");
    for (name, measured, predicted) in [("s1", m1, e1), ("s2a", m2a, e2a), ("s2b", m2b, e2b)] {
        assert!(
            measured * 2 >= predicted && measured <= predicted * 2,
            "{name}: measured {measured} not within 2× of predicted {predicted}"
        );
    }
    format!(
        "predicted s1={e1} s2a={e2a} s2b={e2b}; measured s1={m1} s2a={m2a} s2b={m2b}, ordering and 2× accuracy hold"
    )
}

// ---------------------------------------------------------------------------
// Criterion 6: cardinality and pass-through (also enforced in criterion 1
// for every configuration; this is the standalone check).
// ---------------------------------------------------------------------------

fn c6_cardinality_pass_through() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut runs = 0u64;
    for idx in 0..40 {
        let instance = gen_instance(&mut rng, idx + 7);
        let dir = TempDir::new().unwrap();
        let table = build_table(dir.path(), "t", &instance.columns, &instance.rows);
        let mut input_pass: Vec<Vec<Value>> = table_rows(&table, &["k", "ord", "vi", "vf"]);
        input_pass.sort();
        for algo in ALGORITHMS {
            for strategy in Strategy::all() {
                let run = run_window(
                    &table,
                    &instance.spec,
                    &["k", "ord", "vi", "vf"],
                    algo,
                    strategy,
                );
                assert_eq!(run.stats.rows_out as usize, instance.rows.len());
                let mut pass: Vec<Vec<Value>> =
                    run.rows().iter().map(|r| r[..4].to_vec()).collect();
                pass.sort();
                assert_eq!(pass, input_pass, "{} {}", algo.name(), strategy.name());
                runs += 1;
            }
        }
    }
    format!("{runs} runs: |output| = |input| and pass-through multisets exactly preserved")
}
