//! Database schema description: tables, columns and column ownership.
//!
//! A schema is loaded from a TOML document of the form
//!
//! ```toml
//! [[tables]]
//! name = "depositor"
//! kind = "relationship"          # optional, defaults to "entity"
//! columns = [
//!     { name = "customer_name", type = "text" },
//!     { name = "account_number", type = "text" },
//! ]
//! ```
//!
//! Unknown fields are rejected so that typos surface as load errors.

use std::collections::HashSet;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemaError {
    #[error("schema parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema declares no tables")]
    NoTables,
    #[error("duplicate table name `{0}`")]
    DuplicateTable(String),
    #[error("duplicate column `{column}` in table `{table}`")]
    DuplicateColumn { table: String, column: String },
    #[error("table `{0}` has no columns")]
    EmptyTable(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown value kind `{kind}` for column `{table}.{column}`")]
    UnknownValueKind {
        table: String,
        column: String,
        kind: String,
    },
    #[error("unknown table kind `{kind}` for table `{table}`")]
    UnknownTableKind { table: String, kind: String },
}

/// Type of the values stored in a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Text,
    Integer,
    Real,
}

impl ValueKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueKind::Integer | ValueKind::Real)
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(ValueKind::Text),
            "integer" => Some(ValueKind::Integer),
            "real" => Some(ValueKind::Real),
            _ => None,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Text => "text",
            ValueKind::Integer => "integer",
            ValueKind::Real => "real",
        })
    }
}

/// Entity tables win over relationship (link) tables when a column name is
/// owned by several tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TableKind {
    #[default]
    Entity,
    Relationship,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub value_kind: ValueKind,
}

impl Column {
    pub fn new(name: impl Into<String>, value_kind: ValueKind) -> Self {
        Column {
            name: name.into(),
            value_kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub kind: TableKind,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(name: impl Into<String>, kind: TableKind, columns: Vec<Column>) -> Self {
        Table {
            name: name.into(),
            kind,
            columns,
        }
    }

    /// Case-insensitive column lookup.
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.column(name).is_some()
    }
}

/// A validated schema. Tables and columns keep their declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    tables: Vec<Table>,
}

/// Letters, digits and underscore; must not start with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Schema {
    pub fn new(tables: Vec<Table>) -> Result<Self, SchemaError> {
        if tables.is_empty() {
            return Err(SchemaError::NoTables);
        }
        let mut seen_tables = HashSet::new();
        for table in &tables {
            if !is_identifier(&table.name) {
                return Err(SchemaError::InvalidIdentifier(table.name.clone()));
            }
            if !seen_tables.insert(table.name.to_ascii_lowercase()) {
                return Err(SchemaError::DuplicateTable(table.name.clone()));
            }
            if table.columns.is_empty() {
                return Err(SchemaError::EmptyTable(table.name.clone()));
            }
            let mut seen_columns = HashSet::new();
            for column in &table.columns {
                if !is_identifier(&column.name) {
                    return Err(SchemaError::InvalidIdentifier(column.name.clone()));
                }
                if !seen_columns.insert(column.name.to_ascii_lowercase()) {
                    return Err(SchemaError::DuplicateColumn {
                        table: table.name.clone(),
                        column: column.name.clone(),
                    });
                }
            }
        }
        Ok(Schema { tables })
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables
            .iter()
            .position(|t| t.name.eq_ignore_ascii_case(name))
    }

    /// Tables containing `column_name`, entity tables first, each group in
    /// declaration order. Empty when no table owns the column.
    pub fn tables_owning(&self, column_name: &str) -> Vec<&str> {
        let owners = self.tables.iter().filter(|t| t.has_column(column_name));
        let (entities, links): (Vec<&Table>, Vec<&Table>) =
            owners.partition(|t| t.kind == TableKind::Entity);
        entities
            .into_iter()
            .chain(links)
            .map(|t| t.name.as_str())
            .collect()
    }

    /// Every distinct column name in first-declaration order.
    pub fn column_names(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut names = Vec::new();
        for column in self.tables.iter().flat_map(|t| &t.columns) {
            if seen.insert(column.name.to_ascii_lowercase()) {
                names.push(column.name.as_str());
            }
        }
        names
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    tables: Vec<RawTable>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    name: String,
    kind: Option<String>,
    columns: Vec<RawColumn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumn {
    name: String,
    #[serde(rename = "type")]
    kind: String,
}

/// Parse and validate a schema-config document.
pub fn load_schema(config_text: &str) -> Result<Schema, SchemaError> {
    let raw: RawSchema = toml::from_str(config_text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_col(config_text, span.start))
            .unwrap_or((0, 0));
        SchemaError::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;

    let mut tables = Vec::with_capacity(raw.tables.len());
    for rt in raw.tables {
        let kind = match rt.kind.as_deref() {
            None | Some("entity") => TableKind::Entity,
            Some("relationship") => TableKind::Relationship,
            Some(other) => {
                return Err(SchemaError::UnknownTableKind {
                    table: rt.name,
                    kind: other.to_string(),
                })
            }
        };
        let mut columns = Vec::with_capacity(rt.columns.len());
        for rc in rt.columns {
            let value_kind =
                ValueKind::parse(&rc.kind).ok_or_else(|| SchemaError::UnknownValueKind {
                    table: rt.name.clone(),
                    column: rc.name.clone(),
                    kind: rc.kind.clone(),
                })?;
            columns.push(Column::new(rc.name, value_kind));
        }
        tables.push(Table::new(rt.name, kind, columns));
    }
    Schema::new(tables)
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |nl| {
        before[nl + 1..].chars().count()
    }) + 1;
    (line, column)
}
