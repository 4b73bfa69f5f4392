//! Monoid segment tree with implicit array layout and virtual identity
//! leaves.
//!
//! The tree is a conceptually perfect binary tree over `2^⌈log₂ n⌉` leaf
//! slots, stored as a flat array indexed from the root at 0 with children at
//! `2i+1` and `2i+2`. The all-identity suffix that pads the bottom level to a
//! power of two is never stored; access past the stored region yields the
//! monoid identity instead ("virtual" leaves).
//!
//! Frame queries come in two shapes: index ranges over leaf ordinals (ROWS
//! framing) and value ranges over a sorted ordering attribute (RANGE
//! framing). The value-range walk keeps the index-range structure but
//! replaces segment-equality checks with value-inclusion checks against the
//! leaf ordering values, clamping out-of-range leaf probes to the last real
//! leaf.

use crate::error::{Error, Result};
use crate::monoid::Monoid;
use crate::value::{ColumnData, Tuple, Value};

/// Inclusive leaf-ordinal frame. `f_left > f_right` (or a fully
/// out-of-range frame) folds to the identity.
#[derive(Debug, Clone, Copy)]
pub struct FrameQueryRows {
    pub f_left: i64,
    pub f_right: i64,
}

/// Inclusive value-range frame over the leaf ordering attribute.
#[derive(Debug, Clone)]
pub struct FrameQueryRange {
    pub f_left: Value,
    pub f_right: Value,
}

/// Work done by one frame query: nodes visited and stored nodes folded
/// into the accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct TreeQueryCost {
    pub visits: u64,
    pub combines: u64,
}

pub struct SegmentTree {
    monoid: Monoid,
    identity: Tuple,
    n_leaves: usize,
    /// Leaf slots of the conceptual perfect tree: 2^⌈log₂ n⌉.
    conceptual_leaves: usize,
    leaf_offset: usize,
    /// Flat node storage, `arity` values per node, truncated after the last
    /// real leaf; everything beyond reads as identity.
    nodes: Vec<Value>,
    /// Ordering values per leaf, present when built for value-range queries.
    keys: Option<LeafKeys>,
    build_combines: u64,
}

/// Typed leaf ordering values, unpacked once at build time so value-range
/// walks compare raw keys without per-visit enum dispatch.
enum LeafKeys {
    Int64(Vec<i64>),
    Float64(Vec<f64>),
    Text { width: u8, trimmed: Vec<Vec<u8>> },
}

impl LeafKeys {
    fn from_column(col: &ColumnData) -> LeafKeys {
        match col {
            ColumnData::Int64(v) => LeafKeys::Int64(v.clone()),
            ColumnData::Float64(v) => LeafKeys::Float64(v.clone()),
            ColumnData::Text { width, .. } => LeafKeys::Text {
                width: *width,
                trimmed: (0..col.len())
                    .map(|k| crate::value::trim_padding(col.text_raw(k)).to_vec())
                    .collect(),
            },
        }
    }

    fn value(&self, k: usize) -> Value {
        match self {
            LeafKeys::Int64(v) => Value::Int64(v[k]),
            LeafKeys::Float64(v) => Value::Float64(v[k]),
            LeafKeys::Text { trimmed, .. } => Value::Text(trimmed[k].clone()),
        }
    }

    fn byte_size(&self) -> u64 {
        match self {
            LeafKeys::Int64(v) => v.len() as u64 * 8,
            LeafKeys::Float64(v) => v.len() as u64 * 8,
            LeafKeys::Text { width, trimmed } => (trimmed.len() * *width as usize) as u64,
        }
    }

    /// Ordering of `bound` relative to the key of leaf `k`.
    fn cmp_bound(&self, bound: &Value, k: usize) -> std::cmp::Ordering {
        match (self, bound) {
            (LeafKeys::Int64(v), Value::Int64(b)) => b.cmp(&v[k]),
            (LeafKeys::Float64(v), Value::Float64(b)) => b.total_cmp(&v[k]),
            (LeafKeys::Text { trimmed, .. }, Value::Text(b)) => b.cmp(&trimmed[k]),
            _ => panic!("range bound type does not match leaf key type"),
        }
    }
}

fn conceptual_leaves_for(n: usize) -> usize {
    n.next_power_of_two()
}

impl SegmentTree {
    /// Build from explicit leaf tuples. Bottom-up, touching each stored node
    /// once.
    pub fn build(monoid: Monoid, leaves: &[Tuple]) -> Result<SegmentTree> {
        Self::build_with(monoid, leaves.len(), |i, out| {
            out.extend(leaves[i].iter().cloned())
        })
    }

    /// Build for value-range queries: `keys[i]` is the ordering value of
    /// leaf i and must be nondecreasing (checked in debug builds).
    pub fn build_keyed(monoid: Monoid, keys: ColumnData, leaves: &[Tuple]) -> Result<SegmentTree> {
        Self::build_keyed_with(monoid, keys, leaves.len(), |i, out| {
            out.extend(leaves[i].iter().cloned())
        })
    }

    /// Keyed variant of [`build_with`](Self::build_with).
    pub fn build_keyed_with<F>(
        monoid: Monoid,
        keys: ColumnData,
        n_leaves: usize,
        leaf: F,
    ) -> Result<SegmentTree>
    where
        F: FnMut(usize, &mut Vec<Value>),
    {
        let mut tree = Self::build_with(monoid, n_leaves, leaf)?;
        assert_eq!(keys.len(), n_leaves, "one ordering key per leaf");
        debug_assert!(
            (1..n_leaves).all(|i| keys.cmp_rows(i - 1, &keys, i) != std::cmp::Ordering::Greater),
            "range tree requires leaves sorted by ordering value"
        );
        tree.keys = Some(LeafKeys::from_column(&keys));
        Ok(tree)
    }

    /// Build with a callback that appends the `arity` values of leaf `i`;
    /// avoids materializing a tuple vector when leaves come from columns.
    pub fn build_with<F>(monoid: Monoid, n_leaves: usize, mut leaf: F) -> Result<SegmentTree>
    where
        F: FnMut(usize, &mut Vec<Value>),
    {
        if n_leaves == 0 {
            return Err(Error::InvalidMonoid("segment tree requires ≥1 leaf".into()));
        }
        let arity = monoid.arity();
        let identity = monoid.identity();
        let conceptual = conceptual_leaves_for(n_leaves);
        let leaf_offset = conceptual - 1;
        let stored = leaf_offset + n_leaves;

        let mut nodes: Vec<Value> = Vec::with_capacity(stored * arity);
        for _ in 0..leaf_offset {
            nodes.extend(identity.iter().cloned());
        }
        for i in 0..n_leaves {
            let before = nodes.len();
            leaf(i, &mut nodes);
            debug_assert_eq!(nodes.len(), before + arity, "leaf arity mismatch");
        }

        let mut tree = SegmentTree {
            monoid,
            identity,
            n_leaves,
            conceptual_leaves: conceptual,
            leaf_offset,
            nodes,
            keys: None,
            build_combines: 0,
        };
        let mut scratch = tree.identity.clone();
        let mut combines = 0;
        for i in (0..leaf_offset).rev() {
            scratch.clone_from_slice(&tree.identity);
            if tree.combine_node(2 * i + 1, &mut scratch) {
                combines += 1;
            }
            if tree.combine_node(2 * i + 2, &mut scratch) {
                combines += 1;
            }
            let base = i * arity;
            for (j, v) in scratch.iter().enumerate() {
                tree.nodes[base + j] = v.clone();
            }
        }
        tree.build_combines = combines;
        Ok(tree)
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    /// Number of real leaves (size of the original array).
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    /// Count of physically stored nodes (internal nodes plus real leaves).
    pub fn stored_nodes(&self) -> usize {
        self.leaf_offset + self.n_leaves
    }

    /// Logical byte size of the tree: stored nodes times tuple width plus
    /// the ordering-key column, if any.
    pub fn byte_size(&self) -> u64 {
        let tuple_width: usize = self
            .monoid
            .parts()
            .iter()
            .map(|p| p.value_type.byte_width())
            .sum();
        let keys = self.keys.as_ref().map_or(0, |k| k.byte_size());
        (self.stored_nodes() * tuple_width) as u64 + keys
    }

    fn node(&self, index: usize) -> Option<&[Value]> {
        let arity = self.monoid.arity();
        if index < self.stored_nodes() {
            Some(&self.nodes[index * arity..(index + 1) * arity])
        } else {
            None
        }
    }

    fn combine_node(&self, index: usize, acc: &mut Tuple) -> bool {
        if let Some(node) = self.node(index) {
            self.monoid.combine_into(acc, node);
            return true;
        }
        // Virtual nodes are the identity: nothing to fold in.
        false
    }

    /// Monoid combine operations the construction performed.
    pub fn build_combines(&self) -> u64 {
        self.build_combines
    }

    /// Access any index of the conceptual perfect tree; out-of-real-bounds
    /// indices yield the identity tuple.
    pub fn get_value(&self, index: usize) -> Tuple {
        self.node(index)
            .map(|n| n.to_vec())
            .unwrap_or_else(|| self.identity.clone())
    }

    /// Ordering value of leaf `k`. Panics when the tree was built without
    /// ordering keys.
    pub fn get_leaf_value(&self, k: usize) -> Value {
        self.leaf_keys().value(k)
    }

    /// Ordering value of leaf `k`, clamped to the last real leaf when `k`
    /// points past the bottom level.
    pub fn get_leaf_or_max(&self, k: usize) -> Value {
        self.leaf_keys().value(k.min(self.n_leaves - 1))
    }

    fn leaf_keys(&self) -> &LeafKeys {
        self.keys
            .as_ref()
            .expect("tree was built without ordering keys")
    }

    fn key_cmp(&self, bound: &Value, k: usize) -> std::cmp::Ordering {
        self.leaf_keys().cmp_bound(bound, k)
    }

    /// Fold of `leaves[max(f_left,0) ..= min(f_right, n-1)]`; identity when
    /// the clamped range is empty.
    pub fn evaluate_frame_rows(&self, q: FrameQueryRows) -> Tuple {
        self.evaluate_frame_rows_counting(q).0
    }

    /// Same as [`evaluate_frame_rows`](Self::evaluate_frame_rows), also
    /// returning the number of node visits the walk performed.
    pub fn evaluate_frame_rows_counting(&self, q: FrameQueryRows) -> (Tuple, u64) {
        let mut acc = self.identity.clone();
        let cost = self.eval_rows_into(q, &mut acc);
        (acc, cost.visits)
    }

    /// Accumulator variant for hot loops: `acc` must be the identity (or a
    /// previous partial fold the caller wants extended).
    pub fn eval_rows_into(&self, q: FrameQueryRows, acc: &mut Tuple) -> TreeQueryCost {
        let lo = q.f_left.max(0);
        let hi = q.f_right.min(self.n_leaves as i64 - 1);
        let mut cost = TreeQueryCost::default();
        if lo > hi {
            cost.visits = 1;
            return cost;
        }
        self.rows_walk(
            0,
            0,
            self.conceptual_leaves - 1,
            lo as usize,
            hi as usize,
            acc,
            &mut cost,
        );
        cost
    }

    fn rows_walk(
        &self,
        index: usize,
        c_left: usize,
        c_right: usize,
        f_left: usize,
        f_right: usize,
        acc: &mut Tuple,
        cost: &mut TreeQueryCost,
    ) {
        cost.visits += 1;
        if f_left > f_right {
            return;
        }
        if f_left == c_left && f_right == c_right {
            if self.combine_node(index, acc) {
                cost.combines += 1;
            }
            return;
        }
        let mid = (c_left + c_right) / 2;
        self.rows_walk(
            2 * index + 1,
            c_left,
            mid,
            f_left,
            f_right.min(mid),
            acc,
            cost,
        );
        self.rows_walk(
            2 * index + 2,
            mid + 1,
            c_right,
            f_left.max(mid + 1),
            f_right,
            acc,
            cost,
        );
    }

    /// Fold of every leaf whose ordering value v satisfies
    /// `f_left ≤ v ≤ f_right`; duplicates all included, identity when no
    /// leaf qualifies. Requires a keyed tree.
    pub fn evaluate_frame_range(&self, q: &FrameQueryRange) -> Tuple {
        self.evaluate_frame_range_counting(q).0
    }

    pub fn evaluate_frame_range_counting(&self, q: &FrameQueryRange) -> (Tuple, u64) {
        let mut acc = self.identity.clone();
        let cost = self.eval_range_into(q, &mut acc);
        (acc, cost.visits)
    }

    pub fn eval_range_into(&self, q: &FrameQueryRange, acc: &mut Tuple) -> TreeQueryCost {
        let mut cost = TreeQueryCost::default();
        if q.f_left.total_cmp(&q.f_right) == std::cmp::Ordering::Greater {
            cost.visits = 1;
            return cost;
        }
        // A frame lying entirely below the smallest leaf value would recurse
        // forever down the leftmost spine (no covered-node or emptiness test
        // ever fires); it folds to the identity, so answer directly.
        if self.key_cmp(&q.f_right, 0) == std::cmp::Ordering::Less {
            cost.visits = 1;
            return cost;
        }
        // The walk compares ordering values once or twice per visited node;
        // dispatching on the key type here once keeps enum matching out of
        // the recursion.
        let top = self.conceptual_leaves - 1;
        match self.leaf_keys() {
            LeafKeys::Int64(keys) => match (&q.f_left, &q.f_right) {
                (Value::Int64(lo), Value::Int64(hi)) => {
                    self.range_walk(keys, 0, 0, top, *lo, *hi, acc, &mut cost)
                }
                _ => panic!("range bound type does not match int64 leaf keys"),
            },
            LeafKeys::Float64(keys) => match (&q.f_left, &q.f_right) {
                (Value::Float64(lo), Value::Float64(hi)) => {
                    self.range_walk(keys, 0, 0, top, *lo, *hi, acc, &mut cost)
                }
                _ => panic!("range bound type does not match float64 leaf keys"),
            },
            LeafKeys::Text { trimmed, .. } => match (&q.f_left, &q.f_right) {
                (Value::Text(lo), Value::Text(hi)) => {
                    self.range_walk(trimmed, 0, 0, top, lo.clone(), hi.clone(), acc, &mut cost)
                }
                _ => panic!("range bound type does not match text leaf keys"),
            },
        }
        cost
    }

    #[allow(clippy::too_many_arguments)]
    fn range_walk<K: RangeKey>(
        &self,
        keys: &[K],
        index: usize,
        c_left: usize,
        c_right: usize,
        f_left: K,
        f_right: K,
        acc: &mut Tuple,
        cost: &mut TreeQueryCost,
    ) {
        cost.visits += 1;
        if !f_left.le(&f_right) || c_left >= self.n_leaves {
            return;
        }
        let leaf_or_max = |k: usize| keys[k.min(self.n_leaves - 1)].clone();
        // Covered: the frame interval spans this segment's whole value range.
        if f_left.le(&keys[c_left]) && leaf_or_max(c_right).le(&f_right) {
            if self.combine_node(index, acc) {
                cost.combines += 1;
            }
            return;
        }
        let mid = (c_left + c_right) / 2;
        let left_max = leaf_or_max(mid);
        let left_hi = if f_right.le(&left_max) {
            f_right.clone()
        } else {
            left_max
        };
        self.range_walk(
            keys,
            2 * index + 1,
            c_left,
            mid,
            f_left.clone(),
            left_hi,
            acc,
            cost,
        );
        let right_min = leaf_or_max(mid + 1);
        let right_lo = if right_min.le(&f_left) {
            f_left
        } else {
            right_min
        };
        self.range_walk(
            keys,
            2 * index + 2,
            mid + 1,
            c_right,
            right_lo,
            f_right,
            acc,
            cost,
        );
    }
}

/// Total-order `≤` over raw ordering-key values, so the range walk compares
/// without per-visit enum dispatch. Floats use the IEEE total order,
/// matching `Value::total_cmp`.
trait RangeKey: Clone {
    fn le(&self, other: &Self) -> bool;
}

impl RangeKey for i64 {
    fn le(&self, other: &Self) -> bool {
        self <= other
    }
}

impl RangeKey for f64 {
    fn le(&self, other: &Self) -> bool {
        self.total_cmp(other).is_le()
    }
}

impl RangeKey for Vec<u8> {
    fn le(&self, other: &Self) -> bool {
        self <= other
    }
}
