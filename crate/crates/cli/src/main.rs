//! Command-line front end for the columnar window engine.
//!
//! Subcommands: `gen` (benchmark data), `run` (execute a query file, result
//! CSV on stdout, optional oracle cross-check), `bench` (offset ×
//! algorithm × strategy sweep, report CSV on stdout), `estimate-mem`
//! (strategy memory predictions, optionally with measured peaks). Errors go
//! to stderr with a nonzero exit; results always go to stdout as CSV.

mod query;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use colwin_core::memory::{estimate, measure_params};
use colwin_core::oracle::{oracle_evaluate, results_match};
use colwin_core::position::{filter, materialize, scan, PositionalOperator};
use colwin_core::storage::{Database, TableHandle};
use colwin_core::value::Value;
use colwin_core::window::{
    EvalAlgorithm, FrameBound, FrameMode, Strategy, WindowInput, WindowOperator, WindowRun,
    WindowSpec,
};
use query::QueryFile;

const ORACLE_FLOAT_RTOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "colwin", version, about = "Columnar window-function engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DirArg {
    /// Database directory; defaults to $COLWIN_DATA_DIR.
    #[arg(long)]
    dir: Option<PathBuf>,
}

impl DirArg {
    fn resolve(&self) -> Result<PathBuf> {
        if let Some(dir) = &self.dir {
            return Ok(dir.clone());
        }
        if let Some(env) = std::env::var_os("COLWIN_DATA_DIR") {
            return Ok(PathBuf::from(env));
        }
        bail!("no data directory: pass --dir or set COLWIN_DATA_DIR")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the LINEORDER-like benchmark table.
    Gen {
        #[command(flatten)]
        dir: DirArg,
        /// Rows to generate (SSB scale factor 1 is roughly 6,000,000).
        #[arg(long)]
        rows: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Execute a query file; result CSV on stdout.
    Run {
        #[command(flatten)]
        dir: DirArg,
        #[arg(long)]
        query: PathBuf,
        /// Evaluation algorithm: naive, cumulative, segment-tree.
        #[arg(long)]
        algo: Option<String>,
        /// Materialization strategy: s1, s2a, s2b.
        #[arg(long)]
        strategy: Option<String>,
        /// Cross-check against the brute-force reference evaluator; exits
        /// nonzero on any mismatch.
        #[arg(long)]
        oracle: bool,
    },
    /// Sweep frame offsets × algorithms × strategies; report CSV on stdout.
    Bench {
        #[command(flatten)]
        dir: DirArg,
        #[arg(long)]
        query: PathBuf,
        /// Comma-separated symmetric frame offsets to sweep.
        #[arg(long, value_delimiter = ',')]
        offsets: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "segment-tree")]
        algos: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "s1")]
        strategies: Vec<String>,
        /// Timed repetitions per configuration (one untimed warm-up first).
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
    /// Predicted strategy memory from the cost model; CSV on stdout.
    #[command(name = "estimate-mem")]
    EstimateMem {
        #[command(flatten)]
        dir: DirArg,
        #[arg(long)]
        query: PathBuf,
        /// Also run the query per strategy and report measured peaks.
        #[arg(long)]
        measure: bool,
        #[arg(long)]
        algo: Option<String>,
    },
}

fn main() {
    if let Err(err) = real_main() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { dir, rows, seed } => cmd_gen(&dir.resolve()?, rows, seed),
        Command::Run {
            dir,
            query,
            algo,
            strategy,
            oracle,
        } => cmd_run(
            &dir.resolve()?,
            &query,
            algo.as_deref(),
            strategy.as_deref(),
            oracle,
        ),
        Command::Bench {
            dir,
            query,
            offsets,
            algos,
            strategies,
            reps,
        } => cmd_bench(&dir.resolve()?, &query, &offsets, &algos, &strategies, reps),
        Command::EstimateMem {
            dir,
            query,
            measure,
            algo,
        } => cmd_estimate_mem(&dir.resolve()?, &query, measure, algo.as_deref()),
    }
}

fn cmd_gen(dir: &std::path::Path, rows: u64, seed: u64) -> Result<()> {
    let db = Database::open(dir)?;
    let table = db.create_lineorder(rows, seed)?;
    println!(
        "{} rows in {}/{}",
        table.row_count,
        dir.display(),
        table.name()
    );
    Ok(())
}

fn open_query(
    dir: &std::path::Path,
    path: &std::path::Path,
) -> Result<(Database, TableHandle, QueryFile)> {
    let qf = QueryFile::load(path)?;
    let db = Database::open(dir)?;
    let table = db.table(&qf.table)?;
    Ok((db, table, qf))
}

fn build_input(table: &TableHandle, qf: &QueryFile) -> Result<Box<dyn PositionalOperator>> {
    let scan_op = scan(table, qf.block_size);
    Ok(match qf.filter()? {
        None => Box::new(scan_op),
        Some((attr, op, literal)) => Box::new(filter(scan_op, &attr, op, literal)?),
    })
}

fn execute(
    table: &TableHandle,
    qf: &QueryFile,
    spec: &WindowSpec,
    algo: EvalAlgorithm,
    strategy: Strategy,
) -> Result<WindowRun> {
    let operator = WindowOperator::new(spec.clone(), qf.select.clone(), algo, strategy);
    Ok(operator.execute(WindowInput::Positional(build_input(table, qf)?))?)
}

/// Outer sort: declared keys first, then every output column as tie-break,
/// so identical inputs always produce byte-identical output.
fn outer_sort(run: &WindowRun, sort_by: &[String]) -> Result<Vec<Vec<Value>>> {
    let mut key_idx = Vec::with_capacity(sort_by.len());
    for key in sort_by {
        let idx = run
            .schema
            .iter()
            .position(|(n, _)| n == key)
            .ok_or_else(|| anyhow!("`sort_by` attribute `{key}` is not an output column"))?;
        key_idx.push(idx);
    }
    let mut rows = run.rows();
    rows.sort_by(|a, b| {
        for &i in &key_idx {
            let ord = a[i].total_cmp(&b[i]);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        for (x, y) in a.iter().zip(b.iter()) {
            let ord = x.total_cmp(y);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(rows)
}

fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<Value>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_run(
    dir: &std::path::Path,
    query: &std::path::Path,
    algo: Option<&str>,
    strategy: Option<&str>,
    oracle: bool,
) -> Result<()> {
    let (_db, table, qf) = open_query(dir, query)?;
    let spec = qf.window_spec()?;
    let algo = qf.algorithm(algo)?;
    let strategy = qf.strategy(strategy)?;
    let run = execute(&table, &qf, &spec, algo, strategy)?;
    let rows = outer_sort(&run, &qf.sort_by)?;
    let header: Vec<String> = run.schema.iter().map(|(n, _)| n.clone()).collect();
    write_csv(std::io::stdout().lock(), &header, &rows)?;

    if oracle {
        let reference = run_oracle(&table, &qf, &spec)?;
        results_match(&run.rows(), &reference, ORACLE_FLOAT_RTOL)
            .map_err(|e| anyhow!("oracle mismatch: {e}"))?;
        eprintln!("oracle check passed ({} rows)", run.row_count());
    }
    Ok(())
}

/// Run the reference evaluator over the same (filtered) input.
fn run_oracle(table: &TableHandle, qf: &QueryFile, spec: &WindowSpec) -> Result<Vec<Vec<Value>>> {
    let mut attrs: Vec<String> = qf.select.clone();
    let mut add = |name: &str| {
        if !attrs.iter().any(|a| a == name) {
            attrs.push(name.to_string());
        }
    };
    for key in &spec.partition_keys {
        add(key);
    }
    for (key, _) in &spec.order_keys {
        add(key);
    }
    for f in &spec.functions {
        if let Some(attr) = &f.attr {
            add(attr);
        }
    }
    let attr_refs: Vec<&str> = attrs.iter().map(|s| s.as_str()).collect();
    let mut source = materialize(BoxedOperator(build_input(table, qf)?), &attr_refs)?;
    let schema = source.schema().to_vec();
    let rows = source.collect_rows()?;
    Ok(oracle_evaluate(&rows, &schema, spec, &qf.select)?.flat_rows())
}

/// Adapter so a boxed positional operator can feed generic consumers.
struct BoxedOperator(Box<dyn PositionalOperator>);

impl PositionalOperator for BoxedOperator {
    fn tables(&self) -> &std::sync::Arc<[TableHandle]> {
        self.0.tables()
    }

    fn next_block(&mut self) -> colwin_core::Result<Option<colwin_core::position::JoinIndexBlock>> {
        self.0.next_block()
    }
}

fn cmd_bench(
    dir: &std::path::Path,
    query: &std::path::Path,
    offsets: &[String],
    algos: &[String],
    strategies: &[String],
    reps: usize,
) -> Result<()> {
    if offsets.is_empty() {
        bail!("--offsets requires at least one value");
    }
    if reps == 0 {
        bail!("--reps must be ≥ 1");
    }
    let (_db, table, qf) = open_query(dir, query)?;
    let base_spec = qf.window_spec()?;
    let frame_mode = base_spec
        .frame
        .as_ref()
        .map(|f| f.mode)
        .ok_or_else(|| anyhow!("bench sweeps frame offsets; the query needs a frame"))?;
    let algos: Vec<EvalAlgorithm> = algos
        .iter()
        .map(|a| Ok(EvalAlgorithm::parse(a)?))
        .collect::<Result<_>>()?;
    let strategies: Vec<Strategy> = strategies
        .iter()
        .map(|s| Ok(Strategy::parse(s)?))
        .collect::<Result<_>>()?;

    let mut writer = csv::Writer::from_writer(std::io::stdout().lock());
    writer.write_record([
        "offset",
        "algorithm",
        "strategy",
        "rows_processed",
        "wall_ms",
        "combine_ops",
        "peak_bytes",
    ])?;
    for offset_text in offsets {
        let offset = adapt_offset(&table, &base_spec, frame_mode, offset_text)?;
        let mut spec = base_spec.clone();
        let f = spec.frame.as_mut().unwrap();
        f.start = FrameBound::Preceding(offset.clone());
        f.end = FrameBound::Following(offset.clone());
        for &algo in &algos {
            for &strategy in &strategies {
                // Untimed warm-up, then the timed repetitions.
                execute(&table, &qf, &spec, algo, strategy)?;
                let mut wall = Vec::with_capacity(reps);
                for _ in 0..reps {
                    let start = Instant::now();
                    let run = execute(&table, &qf, &spec, algo, strategy)?;
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    wall.push(ms);
                    writer.write_record([
                        offset_text.clone(),
                        algo.name().to_string(),
                        strategy.name().to_string(),
                        run.stats.rows_in.to_string(),
                        format!("{ms:.3}"),
                        run.stats.combine_ops.to_string(),
                        run.stats.peak_bytes.to_string(),
                    ])?;
                }
                wall.sort_by(|a, b| a.total_cmp(b));
                eprintln!(
                    "offset {offset_text} {} {}: median {:.1} ms over {reps} reps",
                    algo.name(),
                    strategy.name(),
                    wall[wall.len() / 2]
                );
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Match the sweep offset to the frame's offset type: RANGE offsets follow
/// the first ORDER BY key's type, ROWS offsets are row counts.
fn adapt_offset(
    table: &TableHandle,
    spec: &WindowSpec,
    mode: FrameMode,
    text: &str,
) -> Result<Value> {
    let parsed = query::parse_offset(text)?;
    if mode == FrameMode::Rows {
        return match parsed {
            Value::Int64(_) => Ok(parsed),
            _ => bail!("ROWS offsets must be integers, got `{text}`"),
        };
    }
    let order_attr = spec
        .order_keys
        .first()
        .map(|(a, _)| a.as_str())
        .ok_or_else(|| anyhow!("RANGE query without ORDER BY"))?;
    match (table.schema.attr_type(order_attr), parsed) {
        (Some(colwin_core::ValueType::Float64), Value::Int64(v)) => Ok(Value::Float64(v as f64)),
        (Some(colwin_core::ValueType::Float64), v @ Value::Float64(_)) => Ok(v),
        (Some(colwin_core::ValueType::Int64), v @ Value::Int64(_)) => Ok(v),
        (Some(ty), v) => bail!("offset {v} does not match ORDER BY key type {ty}"),
        (None, _) => bail!("unknown ORDER BY attribute `{order_attr}`"),
    }
}

fn cmd_estimate_mem(
    dir: &std::path::Path,
    query: &std::path::Path,
    measure: bool,
    algo: Option<&str>,
) -> Result<()> {
    let (_db, table, qf) = open_query(dir, query)?;
    let spec = qf.window_spec()?;
    let algo = qf.algorithm(algo)?;
    let params =
        measure_params(build_input(&table, &qf)?, &spec).context("measuring model parameters")?;

    let mut writer = csv::Writer::from_writer(std::io::stdout().lock());
    if measure {
        writer.write_record(["strategy", "predicted_bytes", "measured_bytes"])?;
    } else {
        writer.write_record(["strategy", "predicted_bytes"])?;
    }
    let mut tree_peak = 0u64;
    for strategy in Strategy::all() {
        let predicted = estimate(strategy, &params);
        if measure {
            let run = execute(&table, &qf, &spec, algo, strategy)?;
            tree_peak = tree_peak.max(run.stats.tree_peak_bytes);
            writer.write_record([
                strategy.name().to_string(),
                predicted.to_string(),
                run.stats.peak_bytes.to_string(),
            ])?;
        } else {
            writer.write_record([strategy.name().to_string(), predicted.to_string()])?;
        }
    }
    // Segment trees sit outside the strategy formulas; their peak is its
    // own measured line.
    if measure && algo == EvalAlgorithm::SegmentTree {
        writer.write_record([
            "segment-tree".to_string(),
            String::new(),
            tree_peak.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
