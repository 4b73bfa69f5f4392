//! Database catalog: one human-readable manifest per database directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::ValueType;

pub const CATALOG_FILE: &str = "catalog.toml";

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default)]
    pub tables: Vec<CatalogTable>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CatalogTable {
    pub name: String,
    pub row_count: u64,
    pub attributes: Vec<CatalogAttribute>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CatalogAttribute {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: String,
}

impl Catalog {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join(CATALOG_FILE)
    }

    pub fn load(dir: &Path) -> Result<Catalog> {
        let path = Self::path(dir);
        if !path.exists() {
            return Ok(Catalog::default());
        }
        let text = fs::read_to_string(&path)?;
        toml::from_str(&text).map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Catalog(format!("serialize catalog: {e}")))?;
        fs::write(Self::path(dir), text)?;
        Ok(())
    }

    pub fn find(&self, name: &str) -> Option<&CatalogTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find_mut(&mut self, name: &str) -> Option<&mut CatalogTable> {
        self.tables.iter_mut().find(|t| t.name == name)
    }
}

impl CatalogAttribute {
    pub fn parsed_type(&self) -> Result<ValueType> {
        self.value_type.parse()
    }
}
