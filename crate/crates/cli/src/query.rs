//! Declarative query files: a TOML description of source table, optional
//! filter, window specification, pass-through attributes, outer sort and
//! execution knobs.
//!
//! Top-level keys come before the `[window]` tables (TOML scoping):
//!
//! ```toml
//! table = "lineorder"
//! select = ["lo_orderpriority", "lo_ordtotalprice"]
//! sort_by = ["lo_orderpriority"]
//!
//! [window]
//! partition_by = ["lo_orderpriority"]
//! order_by = [{ attr = "lo_ordtotalprice" }]
//!
//! [window.frame]
//! mode = "range"
//! start = { kind = "preceding", offset = 100 }
//! end = { kind = "following", offset = 100 }
//!
//! [[window.functions]]
//! kind = "sum"
//! attr = "lo_ordtotalprice"
//! output = "sum_price"
//! ```

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use colwin_core::position::CmpOp;
use colwin_core::value::Value;
use colwin_core::window::{
    EvalAlgorithm, FrameBound, FrameMode, FrameSpec, FuncKind, SortDirection, Strategy, WindowFunc,
    WindowSpec,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryFile {
    pub table: String,
    pub filter: Option<FilterDef>,
    pub window: WindowDef,
    /// Pass-through attributes, in output order.
    pub select: Vec<String>,
    /// Outer sort keys over the output schema; ties are broken on all
    /// output columns so repeated runs emit byte-identical results.
    #[serde(default)]
    pub sort_by: Vec<String>,
    pub algorithm: Option<String>,
    pub strategy: Option<String>,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
}

fn default_block_size() -> usize {
    4096
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDef {
    pub attr: String,
    pub op: String,
    pub value: toml::Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDef {
    #[serde(default)]
    pub partition_by: Vec<String>,
    #[serde(default)]
    pub order_by: Vec<OrderDef>,
    pub frame: Option<FrameDef>,
    pub functions: Vec<FuncDef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderDef {
    pub attr: String,
    pub dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDef {
    pub mode: String,
    pub start: BoundDef,
    pub end: BoundDef,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundDef {
    pub kind: String,
    pub offset: Option<toml::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuncDef {
    pub kind: String,
    pub attr: Option<String>,
    pub output: String,
}

impl QueryFile {
    pub fn load(path: &std::path::Path) -> Result<QueryFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading query file {}", path.display()))?;
        let file: QueryFile =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if file.select.is_empty() {
            bail!("`select` must list at least one pass-through attribute");
        }
        Ok(file)
    }

    pub fn filter(&self) -> Result<Option<(String, CmpOp, Value)>> {
        let Some(def) = &self.filter else {
            return Ok(None);
        };
        let op = CmpOp::parse(&def.op).with_context(|| "in `filter.op`")?;
        let value = literal_value(&def.value).with_context(|| "in `filter.value`")?;
        Ok(Some((def.attr.clone(), op, value)))
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        let mut order_keys = Vec::with_capacity(self.window.order_by.len());
        for o in &self.window.order_by {
            let dir = match o.dir.as_deref() {
                None | Some("asc") => SortDirection::Asc,
                Some("desc") => SortDirection::Desc,
                Some(other) => bail!("unknown sort direction `{other}`; valid: asc, desc"),
            };
            order_keys.push((o.attr.clone(), dir));
        }
        let frame = match &self.window.frame {
            None => None,
            Some(def) => {
                let mode = match def.mode.as_str() {
                    "rows" => FrameMode::Rows,
                    "range" => FrameMode::Range,
                    other => bail!("unknown frame mode `{other}`; valid: rows, range"),
                };
                Some(FrameSpec {
                    mode,
                    start: bound(&def.start).with_context(|| "in `window.frame.start`")?,
                    end: bound(&def.end).with_context(|| "in `window.frame.end`")?,
                })
            }
        };
        let mut functions = Vec::with_capacity(self.window.functions.len());
        for f in &self.window.functions {
            let kind = match f.kind.as_str() {
                "sum" => FuncKind::Sum,
                "min" => FuncKind::Min,
                "max" => FuncKind::Max,
                "count" => FuncKind::Count,
                "row_number" => FuncKind::RowNumber,
                "rank" => FuncKind::Rank,
                "dense_rank" => FuncKind::DenseRank,
                other => bail!(
                    "unknown function `{other}`; valid: sum, min, max, count, row_number, rank, dense_rank"
                ),
            };
            functions.push(WindowFunc {
                kind,
                attr: f.attr.clone(),
                output: f.output.clone(),
            });
        }
        Ok(WindowSpec {
            partition_keys: self.window.partition_by.clone(),
            order_keys,
            frame,
            functions,
        })
    }

    pub fn algorithm(&self, cli: Option<&str>) -> Result<EvalAlgorithm> {
        let name = cli.or(self.algorithm.as_deref()).unwrap_or("segment-tree");
        Ok(EvalAlgorithm::parse(name)?)
    }

    pub fn strategy(&self, cli: Option<&str>) -> Result<Strategy> {
        let name = cli.or(self.strategy.as_deref()).unwrap_or("s1");
        Ok(Strategy::parse(name)?)
    }
}

fn bound(def: &BoundDef) -> Result<FrameBound> {
    let offset = || -> Result<Value> {
        let v = def
            .offset
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("bound kind `{}` requires an offset", def.kind))?;
        literal_value(v)
    };
    let b = match def.kind.as_str() {
        "unbounded_preceding" => FrameBound::UnboundedPreceding,
        "preceding" => FrameBound::Preceding(offset()?),
        "current_row" => FrameBound::CurrentRow,
        "following" => FrameBound::Following(offset()?),
        "unbounded_following" => FrameBound::UnboundedFollowing,
        other => bail!(
            "unknown bound kind `{other}`; valid: unbounded_preceding, preceding, current_row, following, unbounded_following"
        ),
    };
    if !matches!(b, FrameBound::Preceding(_) | FrameBound::Following(_)) && def.offset.is_some() {
        bail!("bound kind `{}` takes no offset", def.kind);
    }
    Ok(b)
}

pub fn literal_value(v: &toml::Value) -> Result<Value> {
    match v {
        toml::Value::Integer(i) => Ok(Value::Int64(*i)),
        toml::Value::Float(f) => Ok(Value::Float64(*f)),
        toml::Value::String(s) => Ok(Value::text(s)),
        other => bail!("unsupported literal {other}; use integer, float or string"),
    }
}

/// Parse one `--offsets` element: integers stay integers, anything with a
/// decimal point becomes a float offset.
pub fn parse_offset(s: &str) -> Result<Value> {
    if s.contains('.') {
        Ok(Value::Float64(
            s.parse::<f64>()
                .with_context(|| format!("bad offset `{s}`"))?,
        ))
    } else {
        Ok(Value::Int64(
            s.parse::<i64>()
                .with_context(|| format!("bad offset `{s}`"))?,
        ))
    }
}
