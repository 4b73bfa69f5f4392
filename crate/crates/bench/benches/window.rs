//! Microbenchmarks: segment-tree construction and queries against plain
//! folds, and the full window operator across the three evaluation
//! algorithms.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use colwin_core::monoid::{make_monoid, MonoidKind};
use colwin_core::position::TupleBlock;
use colwin_core::segtree::{FrameQueryRange, FrameQueryRows, SegmentTree};
use colwin_core::value::{ColumnData, Value, ValueType};
use colwin_core::window::{
    EvalAlgorithm, FrameBound, FrameMode, FrameSpec, FuncKind, SortDirection, Strategy, WindowFunc,
    WindowInput, WindowOperator, WindowSpec,
};

fn int_leaves(vals: &[i64]) -> Vec<Vec<Value>> {
    vals.iter().map(|v| vec![Value::Int64(*v)]).collect()
}

fn bench_tree_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("segtree_build");
    for n in [1usize << 10, 1 << 16] {
        let vals: Vec<i64> = (0..n as i64).map(|i| i * 31 % 10_007).collect();
        let leaves = int_leaves(&vals);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &leaves, |b, leaves| {
            b.iter(|| {
                SegmentTree::build(
                    make_monoid(MonoidKind::SumI64, ValueType::Int64).unwrap(),
                    leaves,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_frame_queries(c: &mut Criterion) {
    let n = 1usize << 16;
    let mut vals: Vec<i64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..n).map(|_| rng.gen_range(0..1_000_000)).collect()
    };
    vals.sort_unstable();
    let tree = SegmentTree::build_keyed(
        make_monoid(MonoidKind::SumI64, ValueType::Int64).unwrap(),
        ColumnData::Int64(vals.clone()),
        &int_leaves(&vals),
    )
    .unwrap();

    let mut group = c.benchmark_group("frame_query");
    for width in [64usize, 4096] {
        group.bench_with_input(BenchmarkId::new("tree_rows", width), &width, |b, &w| {
            let mut acc = tree.monoid().identity();
            let mut l = 0usize;
            b.iter(|| {
                acc[0] = Value::Int64(0);
                let q = FrameQueryRows {
                    f_left: l as i64,
                    f_right: (l + w) as i64,
                };
                tree.eval_rows_into(q, &mut acc);
                l = (l + 97) % (n - w);
            })
        });
        group.bench_with_input(BenchmarkId::new("slice_fold", width), &width, |b, &w| {
            let mut l = 0usize;
            b.iter(|| {
                let s: i64 = vals[l..=l + w].iter().sum();
                l = (l + 97) % (n - w);
                s
            })
        });
        group.bench_with_input(BenchmarkId::new("tree_range", width), &width, |b, &w| {
            let mut acc = tree.monoid().identity();
            let mut l = 0usize;
            b.iter(|| {
                acc[0] = Value::Int64(0);
                let q = FrameQueryRange {
                    f_left: Value::Int64(vals[l]),
                    f_right: Value::Int64(vals[l + w]),
                };
                tree.eval_range_into(&q, &mut acc);
                l = (l + 97) % (n - w);
            })
        });
    }
    group.finish();
}

fn operator_input(n: usize) -> WindowInput {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let schema = vec![
        ("k".to_string(), ValueType::Int64),
        ("ord".to_string(), ValueType::Int64),
        ("v".to_string(), ValueType::Int64),
    ];
    let block = TupleBlock::new(
        schema.clone(),
        vec![
            ColumnData::Int64((0..n).map(|_| rng.gen_range(0..5)).collect()),
            ColumnData::Int64((0..n).map(|_| rng.gen_range(0..1_000_000)).collect()),
            ColumnData::Int64((0..n).map(|_| rng.gen_range(-1000..1000)).collect()),
        ],
    );
    WindowInput::Tuples {
        schema,
        blocks: vec![block],
    }
}

fn bench_window_algorithms(c: &mut Criterion) {
    let n = 100_000;
    let spec = WindowSpec {
        partition_keys: vec!["k".into()],
        order_keys: vec![("ord".into(), SortDirection::Asc)],
        frame: Some(FrameSpec {
            mode: FrameMode::Rows,
            start: FrameBound::Preceding(Value::Int64(250)),
            end: FrameBound::Following(Value::Int64(250)),
        }),
        functions: vec![WindowFunc {
            kind: FuncKind::Sum,
            attr: Some("v".into()),
            output: "s".into(),
        }],
    };
    let mut group = c.benchmark_group("window_operator");
    group.throughput(Throughput::Elements(n as u64));
    group.sample_size(10);
    for algo in [
        EvalAlgorithm::Naive,
        EvalAlgorithm::Cumulative,
        EvalAlgorithm::SegmentTree,
    ] {
        group.bench_function(algo.name(), |b| {
            b.iter_batched(
                || operator_input(n),
                |input| {
                    WindowOperator::new(spec.clone(), vec!["k".into()], algo, Strategy::S1)
                        .execute(input)
                        .unwrap()
                },
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_tree_build,
    bench_frame_queries,
    bench_window_algorithms
);
criterion_main!(benches);
