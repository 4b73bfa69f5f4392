//! Columnar storage: one file per attribute, a catalog manifest per
//! directory, positional readers, CSV loading and the benchmark table
//! generator.
//!
//! Storage is immutable once loaded; any number of readers may scan the same
//! table concurrently. Writers (create / load / generate) assume exclusive
//! access to the database directory.

mod catalog;
mod lineorder;
mod reader;

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::value::{encode_value_into, Value, ValueType};

pub use catalog::{Catalog, CatalogAttribute, CatalogTable, CATALOG_FILE};
pub use lineorder::{LINEORDER_PRIORITIES, LINEORDER_TABLE};
pub use reader::{ColumnReader, SyncReader, READ_BLOCK_VALUES};

/// 0-based row ordinal within one table.
pub type Position = u64;

/// Declarative table description: ordered attributes with fixed-width types.
#[derive(Debug, Clone)]
pub struct TableSchema {
    pub name: String,
    pub attributes: Vec<(String, ValueType)>,
}

impl TableSchema {
    pub fn new(name: &str, attributes: &[(&str, ValueType)]) -> TableSchema {
        TableSchema {
            name: name.to_string(),
            attributes: attributes
                .iter()
                .map(|(n, t)| (n.to_string(), *t))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::Schema("schema must have ≥1 attribute".into()));
        }
        for (i, (name, ty)) in self.attributes.iter().enumerate() {
            ty.validate()?;
            if self.attributes[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::Schema(format!("duplicate attribute `{name}`")));
            }
        }
        Ok(())
    }

    pub fn attr_index(&self, attr: &str) -> Option<usize> {
        self.attributes.iter().position(|(n, _)| n == attr)
    }

    pub fn attr_type(&self, attr: &str) -> Option<ValueType> {
        self.attributes
            .iter()
            .find(|(n, _)| n == attr)
            .map(|(_, t)| *t)
    }

    /// Sum of attribute byte widths, i.e. size of one materialized tuple.
    pub fn row_byte_width(&self) -> usize {
        self.attributes.iter().map(|(_, t)| t.byte_width()).sum()
    }
}

/// A database directory holding column files plus the catalog manifest.
#[derive(Debug, Clone)]
pub struct Database {
    dir: PathBuf,
}

impl Database {
    /// Open an existing directory or create it (and an empty catalog).
    pub fn open(dir: &Path) -> Result<Database> {
        fs::create_dir_all(dir)?;
        Ok(Database {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Create an empty table: one empty column file per attribute plus a
    /// catalog entry. Fails on duplicate table names.
    pub fn create_table(&self, schema: &TableSchema) -> Result<TableHandle> {
        schema.validate()?;
        let mut catalog = Catalog::load(&self.dir)?;
        if catalog.find(&schema.name).is_some() {
            return Err(Error::Catalog(format!(
                "table `{}` already exists",
                schema.name
            )));
        }
        let table_dir = self.dir.join(&schema.name);
        fs::create_dir_all(&table_dir)?;
        for (attr, _) in &schema.attributes {
            File::create(column_path(&table_dir, attr))?;
        }
        catalog.tables.push(CatalogTable {
            name: schema.name.clone(),
            row_count: 0,
            attributes: schema
                .attributes
                .iter()
                .map(|(n, t)| CatalogAttribute {
                    name: n.clone(),
                    value_type: t.to_string(),
                })
                .collect(),
        });
        catalog.save(&self.dir)?;
        Ok(TableHandle {
            dir: table_dir,
            db_dir: self.dir.clone(),
            schema: schema.clone(),
            row_count: 0,
        })
    }

    pub fn table(&self, name: &str) -> Result<TableHandle> {
        let catalog = Catalog::load(&self.dir)?;
        let entry = catalog
            .find(name)
            .ok_or_else(|| Error::Catalog(format!("table `{name}` not found")))?;
        let mut attributes = Vec::with_capacity(entry.attributes.len());
        for attr in &entry.attributes {
            attributes.push((attr.name.clone(), attr.parsed_type()?));
        }
        Ok(TableHandle {
            dir: self.dir.join(name),
            db_dir: self.dir.clone(),
            schema: TableSchema {
                name: name.to_string(),
                attributes,
            },
            row_count: entry.row_count,
        })
    }

    pub fn table_names(&self) -> Result<Vec<String>> {
        Ok(Catalog::load(&self.dir)?
            .tables
            .iter()
            .map(|t| t.name.clone())
            .collect())
    }

    /// Load a headerless CSV into an existing table, appending rows. The
    /// whole file is parsed before anything is written, so a parse failure
    /// leaves the table untouched. Returns the number of rows appended.
    pub fn load_csv(&self, table: &str, csv_path: &Path) -> Result<u64> {
        let handle = self.table(table)?;
        let schema = &handle.schema;
        let file = File::open(csv_path)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(file);

        // Stage everything in memory first; flush only on full success.
        let mut staged: Vec<Vec<u8>> = schema.attributes.iter().map(|_| Vec::new()).collect();
        let mut rows = 0u64;
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse(format!("csv read: {e}")))?;
            let line = record.position().map_or(rows + 1, |p| p.line());
            if record.len() != schema.attributes.len() {
                return Err(Error::CsvLoad {
                    line,
                    column: record.len().min(schema.attributes.len()) + 1,
                    message: format!(
                        "expected {} fields, found {}",
                        schema.attributes.len(),
                        record.len()
                    ),
                });
            }
            for (i, (_, ty)) in schema.attributes.iter().enumerate() {
                let value = Value::parse(ty, &record[i]).map_err(|e| Error::CsvLoad {
                    line,
                    column: i + 1,
                    message: e.to_string(),
                })?;
                encode_value_into(ty, &value, &mut staged[i]);
            }
            rows += 1;
        }

        for (i, (attr, _)) in schema.attributes.iter().enumerate() {
            let mut file = OpenOptions::new()
                .append(true)
                .open(column_path(&handle.dir, attr))?;
            file.write_all(&staged[i])?;
        }
        self.bump_row_count(table, rows)?;
        Ok(rows)
    }

    /// Append `rows` deterministically generated benchmark rows; see the
    /// `lineorder` module for the column layout. Returns the rows written.
    pub fn generate_lineorder(&self, table: &str, rows: u64, seed: u64) -> Result<u64> {
        let handle = self.table(table)?;
        lineorder::generate(&handle, rows, seed)?;
        self.bump_row_count(table, rows)?;
        Ok(rows)
    }

    /// Create the standard benchmark table and fill it in one call.
    pub fn create_lineorder(&self, rows: u64, seed: u64) -> Result<TableHandle> {
        self.create_table(&lineorder::schema())?;
        self.generate_lineorder(LINEORDER_TABLE, rows, seed)?;
        self.table(LINEORDER_TABLE)
    }

    fn bump_row_count(&self, table: &str, added: u64) -> Result<()> {
        let mut catalog = Catalog::load(&self.dir)?;
        let entry = catalog
            .find_mut(table)
            .ok_or_else(|| Error::Catalog(format!("table `{table}` not found")))?;
        entry.row_count += added;
        catalog.save(&self.dir)
    }
}

/// Snapshot of one table: schema, row count and file locations.
#[derive(Debug, Clone)]
pub struct TableHandle {
    dir: PathBuf,
    db_dir: PathBuf,
    pub schema: TableSchema,
    pub row_count: u64,
}

impl TableHandle {
    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn db_dir(&self) -> &Path {
        &self.db_dir
    }

    pub fn column_path(&self, attr: &str) -> Result<PathBuf> {
        if self.schema.attr_index(attr).is_none() {
            return Err(Error::UnknownAttribute(format!(
                "{}.{}",
                self.schema.name, attr
            )));
        }
        Ok(column_path(&self.dir, attr))
    }

    /// Open a buffered positional reader over one attribute.
    pub fn reader(&self, attr: &str) -> Result<ColumnReader> {
        let ty = self
            .schema
            .attr_type(attr)
            .ok_or_else(|| Error::UnknownAttribute(format!("{}.{}", self.schema.name, attr)))?;
        ColumnReader::open(
            &column_path(&self.dir, attr),
            ty,
            self.row_count,
            self.schema.name.clone(),
        )
    }

    /// Read values of one attribute at the given positions, in request order.
    pub fn column_reader(&self, attr: &str, positions: &[Position]) -> Result<Vec<Value>> {
        let mut reader = self.reader(attr)?;
        let mut out = Vec::with_capacity(positions.len());
        for &pos in positions {
            out.push(reader.value_at(pos)?);
        }
        Ok(out)
    }

    /// Read several attributes synchronously: row i of the output is the
    /// tuple of all requested attribute values at positions[i].
    pub fn sync_reader(&self, attrs: &[&str], positions: &[Position]) -> Result<Vec<Vec<Value>>> {
        let mut sync = SyncReader::open(self, attrs)?;
        sync.read_tuples(positions)
    }

    /// Raw append of pre-encoded column bytes; used by the generator.
    fn column_writer(&self, attr: &str) -> Result<BufWriter<File>> {
        let file = OpenOptions::new()
            .append(true)
            .open(column_path(&self.dir, attr))?;
        Ok(BufWriter::new(file))
    }
}

fn column_path(table_dir: &Path, attr: &str) -> PathBuf {
    table_dir.join(format!("{attr}.col"))
}
