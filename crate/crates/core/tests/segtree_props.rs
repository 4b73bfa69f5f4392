//! Property tests: segment-tree queries against independent sequential
//! folds, on random arrays, monoids and frames.

use colwin_core::monoid::{compose, make_monoid, Monoid, MonoidKind};
use colwin_core::segtree::{FrameQueryRange, FrameQueryRows, SegmentTree};
use colwin_core::value::{ColumnData, Value, ValueType};
use proptest::prelude::*;

fn monoid_for(kinds: &[MonoidKind]) -> Monoid {
    let parts: Vec<Monoid> = kinds
        .iter()
        .map(|k| make_monoid(*k, ValueType::Int64).unwrap())
        .collect();
    compose(&parts).unwrap()
}

/// Sequential fold oracle over a leaf slice, one component per kind.
fn fold_slice(kinds: &[MonoidKind], vals: &[i64]) -> Vec<Value> {
    kinds
        .iter()
        .map(|kind| {
            Value::Int64(match kind {
                MonoidKind::SumI64 => vals.iter().sum(),
                MonoidKind::Count => vals.len() as i64,
                MonoidKind::Min => vals.iter().copied().min().unwrap_or(i64::MAX),
                MonoidKind::Max => vals.iter().copied().max().unwrap_or(i64::MIN),
                MonoidKind::SumF64 => unreachable!("integer arrays"),
            })
        })
        .collect()
}

fn leaves_for(kinds: &[MonoidKind], vals: &[i64]) -> Vec<Vec<Value>> {
    vals.iter()
        .map(|v| {
            kinds
                .iter()
                .map(|k| match k {
                    MonoidKind::Count => Value::Int64(1),
                    _ => Value::Int64(*v),
                })
                .collect()
        })
        .collect()
}

fn kind_sets() -> Vec<Vec<MonoidKind>> {
    vec![
        vec![MonoidKind::SumI64],
        vec![MonoidKind::Min],
        vec![MonoidKind::Max],
        vec![MonoidKind::Count],
        vec![MonoidKind::SumI64, MonoidKind::Min],
        vec![MonoidKind::Max, MonoidKind::Count, MonoidKind::SumI64],
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rows_queries_equal_slice_folds(
        vals in prop::collection::vec(-1_000_000i64..1_000_000, 1..300),
        queries in prop::collection::vec((-10i64..2100, -10i64..2100), 1..24),
    ) {
        let n = vals.len();
        for kinds in kind_sets() {
            let tree = SegmentTree::build(monoid_for(&kinds), &leaves_for(&kinds, &vals)).unwrap();
            for &(l, r) in &queries {
                let got = tree.evaluate_frame_rows(FrameQueryRows { f_left: l, f_right: r });
                let lo = l.max(0) as usize;
                let hi = (r.min(n as i64 - 1) + 1).max(0) as usize;
                let slice = if lo < hi { &vals[lo..hi] } else { &[][..] };
                let expect = fold_slice(&kinds, slice);
                prop_assert_eq!(&got, &expect, "kinds {:?} l={} r={}", kinds, l, r);
            }
        }
    }

    #[test]
    fn range_queries_equal_filter_folds(
        mut vals in prop::collection::vec(-100i64..100, 1..300),
        queries in prop::collection::vec((-120i64..120, -120i64..120), 1..24),
    ) {
        vals.sort_unstable();
        for kinds in kind_sets() {
            let tree = SegmentTree::build_keyed(
                monoid_for(&kinds),
                ColumnData::Int64(vals.clone()),
                &leaves_for(&kinds, &vals),
            )
            .unwrap();
            for &(lo, hi) in &queries {
                let got = tree.evaluate_frame_range(&FrameQueryRange {
                    f_left: Value::Int64(lo),
                    f_right: Value::Int64(hi),
                });
                let qualifying: Vec<i64> =
                    vals.iter().copied().filter(|v| lo <= *v && *v <= hi).collect();
                let expect = fold_slice(&kinds, &qualifying);
                prop_assert_eq!(&got, &expect, "kinds {:?} lo={} hi={}", kinds, lo, hi);
            }
        }
    }

    #[test]
    fn node_visits_stay_logarithmic(
        vals in prop::collection::vec(-1000i64..1000, 1..2048),
        queries in prop::collection::vec((0usize..2048, 0usize..2048), 1..16),
    ) {
        let n = vals.len();
        let mut sorted = vals.clone();
        sorted.sort_unstable();
        let kinds = [MonoidKind::SumI64];
        let tree = SegmentTree::build_keyed(
            monoid_for(&kinds),
            ColumnData::Int64(sorted.clone()),
            &leaves_for(&kinds, &sorted),
        )
        .unwrap();
        let height = (usize::BITS - (n - 1).leading_zeros()) as u64;
        let bound = 4 * height + 4;
        for &(a, b) in &queries {
            let (l, r) = (a.min(n - 1), b.min(n - 1));
            let (_, visits) = tree.evaluate_frame_rows_counting(FrameQueryRows {
                f_left: l as i64,
                f_right: r as i64,
            });
            prop_assert!(visits <= bound, "rows: {} > {}", visits, bound);
            let (_, visits) = tree.evaluate_frame_range_counting(&FrameQueryRange {
                f_left: Value::Int64(sorted[l]),
                f_right: Value::Int64(sorted[r]),
            });
            prop_assert!(visits <= bound, "range: {} > {}", visits, bound);
        }
    }

    #[test]
    fn identity_padding_is_neutral(
        vals in prop::collection::vec(-1000i64..1000, 1..130),
        pad in 1usize..70,
    ) {
        // SUM identity is 0: appending zero leaves must not change any
        // in-range answer even though the tree height may grow.
        let kinds = [MonoidKind::SumI64];
        let padded: Vec<i64> = vals.iter().copied().chain(std::iter::repeat_n(0, pad)).collect();
        let plain = SegmentTree::build(monoid_for(&kinds), &leaves_for(&kinds, &vals)).unwrap();
        let grown = SegmentTree::build(monoid_for(&kinds), &leaves_for(&kinds, &padded)).unwrap();
        for l in 0..vals.len() {
            let q = FrameQueryRows { f_left: l as i64, f_right: vals.len() as i64 - 1 };
            prop_assert_eq!(plain.evaluate_frame_rows(q), grown.evaluate_frame_rows(q));
        }
    }
}
