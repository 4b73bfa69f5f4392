//! Declarative window descriptions and their validation rules.

use crate::error::{Error, Result};
use crate::monoid::MonoidKind;
use crate::value::{Value, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortDirection {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameMode {
    Rows,
    Range,
}

/// One frame border. Offsets are constant literals: row counts for ROWS
/// framing, ordering-attribute deltas for RANGE framing.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameBound {
    UnboundedPreceding,
    Preceding(Value),
    CurrentRow,
    Following(Value),
    UnboundedFollowing,
}

impl FrameBound {
    pub fn offset(&self) -> Option<&Value> {
        match self {
            FrameBound::Preceding(v) | FrameBound::Following(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub mode: FrameMode,
    pub start: FrameBound,
    pub end: FrameBound,
}

/// Window function kinds. The first four are framed aggregates backed by
/// monoids; the ranking functions operate on the whole ordered group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuncKind {
    Sum,
    Min,
    Max,
    Count,
    RowNumber,
    Rank,
    DenseRank,
}

impl FuncKind {
    pub fn is_framed(&self) -> bool {
        matches!(
            self,
            FuncKind::Sum | FuncKind::Min | FuncKind::Max | FuncKind::Count
        )
    }

    pub fn is_ranking(&self) -> bool {
        !self.is_framed()
    }

    pub fn name(&self) -> &'static str {
        match self {
            FuncKind::Sum => "sum",
            FuncKind::Min => "min",
            FuncKind::Max => "max",
            FuncKind::Count => "count",
            FuncKind::RowNumber => "row_number",
            FuncKind::Rank => "rank",
            FuncKind::DenseRank => "dense_rank",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WindowFunc {
    pub kind: FuncKind,
    /// Framed attribute; required for SUM/MIN/MAX, optional for COUNT
    /// (rows are counted either way in this null-free engine), absent for
    /// ranking functions.
    pub attr: Option<String>,
    pub output: String,
}

/// Full window description: PARTITION BY keys, ORDER BY keys with
/// direction, one shared frame for every framed function, and the function
/// list evaluated together over that frame.
#[derive(Debug, Clone)]
pub struct WindowSpec {
    pub partition_keys: Vec<String>,
    pub order_keys: Vec<(String, SortDirection)>,
    pub frame: Option<FrameSpec>,
    pub functions: Vec<WindowFunc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalAlgorithm {
    Naive,
    Cumulative,
    SegmentTree,
}

impl EvalAlgorithm {
    pub fn parse(s: &str) -> Result<EvalAlgorithm> {
        Ok(match s {
            "naive" => EvalAlgorithm::Naive,
            "cumulative" => EvalAlgorithm::Cumulative,
            "segment-tree" | "segtree" => EvalAlgorithm::SegmentTree,
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "unknown algorithm `{s}`; valid: naive, cumulative, segment-tree"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EvalAlgorithm::Naive => "naive",
            EvalAlgorithm::Cumulative => "cumulative",
            EvalAlgorithm::SegmentTree => "segment-tree",
        }
    }
}

/// Materialization strategy for positional input. Ignored (tuples pass
/// straight into the hash table) when the operator sits past the
/// materialization point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Tuples materialized during hash table population.
    S1,
    /// Keys materialized; positions stored as hash values; each group fully
    /// materialized at processing time, dropping read positions.
    S2a,
    /// Keys materialized; per group only sorting attributes materialized;
    /// aggregated attributes fetched on demand per frame.
    S2b,
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Strategy> {
        Ok(match s {
            "s1" | "S1" => Strategy::S1,
            "s2a" | "S2a" => Strategy::S2a,
            "s2b" | "S2b" => Strategy::S2b,
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "unknown strategy `{s}`; valid: s1, s2a, s2b"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::S1 => "s1",
            Strategy::S2a => "s2a",
            Strategy::S2b => "s2b",
        }
    }

    pub fn all() -> [Strategy; 3] {
        [Strategy::S1, Strategy::S2a, Strategy::S2b]
    }
}

fn offset_is_valid(mode: FrameMode, offset: &Value, order_type: Option<ValueType>) -> Result<()> {
    match mode {
        FrameMode::Rows => match offset {
            Value::Int64(v) if *v >= 0 => Ok(()),
            Value::Int64(_) => Err(Error::InvalidSpec(
                "ROWS offsets must be nonnegative".into(),
            )),
            _ => Err(Error::InvalidSpec(
                "ROWS offsets must be int64 row counts".into(),
            )),
        },
        FrameMode::Range => {
            let ty = order_type.ok_or_else(|| {
                Error::InvalidSpec("RANGE framing requires an ORDER BY key".into())
            })?;
            match (offset, ty) {
                (Value::Int64(v), ValueType::Int64) if *v >= 0 => Ok(()),
                (Value::Float64(v), ValueType::Float64) if *v >= 0.0 => Ok(()),
                (Value::Int64(_), ValueType::Int64) | (Value::Float64(_), ValueType::Float64) => {
                    Err(Error::InvalidSpec("RANGE offsets must be nonnegative".into()))
                }
                _ => Err(Error::InvalidSpec(format!(
                    "RANGE offset must match the first ORDER BY key type ({ty}), and that key must be numeric"
                ))),
            }
        }
    }
}

/// Check every structural rule of a window spec against an attribute-type
/// lookup. Returns the monoid kind chosen for each framed function.
pub fn validate_spec<F>(spec: &WindowSpec, lookup: F) -> Result<Vec<Option<MonoidKind>>>
where
    F: Fn(&str) -> Option<ValueType>,
{
    if spec.functions.is_empty() {
        return Err(Error::InvalidSpec("function list must be non-empty".into()));
    }
    for key in &spec.partition_keys {
        lookup(key).ok_or_else(|| Error::UnknownAttribute(key.clone()))?;
    }
    for (key, _) in &spec.order_keys {
        lookup(key).ok_or_else(|| Error::UnknownAttribute(key.clone()))?;
    }
    let mut seen_outputs: Vec<&str> = Vec::new();
    for f in &spec.functions {
        if seen_outputs.contains(&f.output.as_str()) {
            return Err(Error::InvalidSpec(format!(
                "duplicate output name `{}`",
                f.output
            )));
        }
        seen_outputs.push(&f.output);
    }

    let first_order = spec.order_keys.first();
    let first_order_type = first_order.and_then(|(a, _)| lookup(a));

    let any_framed = spec.functions.iter().any(|f| f.kind.is_framed());
    let any_ranking = spec.functions.iter().any(|f| f.kind.is_ranking());
    if any_ranking && spec.order_keys.is_empty() {
        return Err(Error::InvalidSpec(
            "ranking functions require a non-empty ORDER BY".into(),
        ));
    }
    if any_framed && spec.frame.is_none() {
        return Err(Error::InvalidSpec(
            "framed functions require a frame specification".into(),
        ));
    }

    if let Some(frame) = &spec.frame {
        match frame.start {
            FrameBound::UnboundedPreceding | FrameBound::Preceding(_) | FrameBound::CurrentRow => {}
            _ => {
                return Err(Error::InvalidSpec(
                    "frame start bound must be one of UNBOUNDED PRECEDING, offset PRECEDING, CURRENT ROW"
                        .into(),
                ))
            }
        }
        match frame.end {
            FrameBound::CurrentRow | FrameBound::Following(_) | FrameBound::UnboundedFollowing => {}
            _ => return Err(Error::InvalidSpec(
                "frame end bound must be one of CURRENT ROW, offset FOLLOWING, UNBOUNDED FOLLOWING"
                    .into(),
            )),
        }
        for bound in [&frame.start, &frame.end] {
            if let Some(off) = bound.offset() {
                offset_is_valid(frame.mode, off, first_order_type)?;
            }
        }
        if frame.mode == FrameMode::Range {
            let (first_attr, dir) = first_order.ok_or_else(|| {
                Error::InvalidSpec("RANGE framing requires a non-empty ORDER BY".into())
            })?;
            if *dir == SortDirection::Desc {
                return Err(Error::InvalidSpec(
                    "RANGE framing over a descending ORDER BY is not supported; sort ascending"
                        .into(),
                ));
            }
            // RANGE frames are computed over the attribute the window
            // functions aggregate, which therefore must lead the ORDER BY.
            for f in &spec.functions {
                if f.kind.is_framed() && f.kind != FuncKind::Count {
                    match &f.attr {
                        Some(a) if a == first_attr => {}
                        Some(a) => {
                            return Err(Error::InvalidSpec(format!(
                                "RANGE framing requires function attribute `{a}` to be the first ORDER BY key (`{first_attr}`)"
                            )))
                        }
                        None => unreachable!("checked below"),
                    }
                }
            }
        }
    }

    let mut kinds = Vec::with_capacity(spec.functions.len());
    for f in &spec.functions {
        let kind = match f.kind {
            FuncKind::Sum | FuncKind::Min | FuncKind::Max => {
                let attr = f.attr.as_deref().ok_or_else(|| {
                    Error::InvalidSpec(format!("{} requires an attribute", f.kind.name()))
                })?;
                let ty = lookup(attr).ok_or_else(|| Error::UnknownAttribute(attr.into()))?;
                Some(match f.kind {
                    FuncKind::Sum => match ty {
                        ValueType::Int64 => MonoidKind::SumI64,
                        ValueType::Float64 => MonoidKind::SumF64,
                        ValueType::FixedText(_) => {
                            return Err(Error::TypeMismatch(format!(
                                "sum over text attribute `{attr}`"
                            )))
                        }
                    },
                    FuncKind::Min => MonoidKind::Min,
                    FuncKind::Max => MonoidKind::Max,
                    _ => unreachable!(),
                })
            }
            FuncKind::Count => {
                if let Some(attr) = f.attr.as_deref() {
                    lookup(attr).ok_or_else(|| Error::UnknownAttribute(attr.into()))?;
                }
                Some(MonoidKind::Count)
            }
            FuncKind::RowNumber | FuncKind::Rank | FuncKind::DenseRank => {
                if f.attr.is_some() {
                    return Err(Error::InvalidSpec(format!(
                        "{} takes no attribute",
                        f.kind.name()
                    )));
                }
                None
            }
        };
        kinds.push(kind);
    }
    Ok(kinds)
}

/// Output value type of one window function over an attribute of type `ty`.
pub fn output_type(kind: FuncKind, attr_type: Option<ValueType>) -> ValueType {
    match kind {
        FuncKind::Sum | FuncKind::Min | FuncKind::Max => attr_type.expect("framed attr type"),
        FuncKind::Count | FuncKind::RowNumber | FuncKind::Rank | FuncKind::DenseRank => {
            ValueType::Int64
        }
    }
}
