//! CSV-backed tables and a nested-loop executor for resolved queries.

use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ir::{Literal, Predicate};
use crate::query::{ColumnRef, ResolvedQuery};
use crate::schema::{Schema, Table, ValueKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DataError {
    #[error("missing data file {path} for table `{table}`")]
    MissingFile { table: String, path: PathBuf },
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed CSV for table `{table}`: {message}")]
    Csv { table: String, message: String },
    #[error("header of `{table}` is [{}], expected [{}]", found.join(", "), expected.join(", "))]
    HeaderMismatch {
        table: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("table `{table}` row {row}, column `{column}`: cannot read `{value}` as {kind}")]
    BadCell {
        table: String,
        /// 1-based data row, header excluded.
        row: usize,
        column: String,
        value: String,
        kind: ValueKind,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("table `{0}` is not loaded")]
    MissingTable(String),
    #[error("column `{0}` is not loaded")]
    MissingColumn(ColumnRef),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Text(String),
    Integer(i64),
    Real(f64),
}

impl Value {
    fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    /// SQL-style equality: null equals nothing, numbers compare numerically.
    pub fn sql_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Text(a), Value::Text(b)) => a == b,
            (Value::Integer(a), Value::Integer(b)) => a == b,
            _ => match (self.as_f64(), other.as_f64()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }

    /// Ordering against a literal; `None` for nulls and mismatched types.
    pub fn compare_literal(&self, literal: &Literal) -> Option<Ordering> {
        match (self, literal) {
            (Value::Text(s), Literal::Text(l)) => Some(s.as_bytes().cmp(l.as_bytes())),
            (v, Literal::Number(n)) => v.as_f64()?.partial_cmp(&n.value()),
            _ => None,
        }
    }

    fn parse(cell: &str, kind: ValueKind) -> Option<Value> {
        if cell.is_empty() {
            return Some(Value::Null);
        }
        match kind {
            ValueKind::Text => Some(Value::Text(cell.to_string())),
            ValueKind::Integer => cell.trim().parse().ok().map(Value::Integer),
            ValueKind::Real => cell
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|r| r.is_finite())
                .map(Value::Real),
        }
    }
}

impl fmt::Display for Value {
    /// Nulls print as an empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Text(s) => f.write_str(s),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl TableData {
    fn column_index(&self, column: &str) -> Option<usize> {
        self.header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(column))
    }
}

/// Read one table from CSV text. The header must list the schema columns
/// in declaration order; empty cells are nulls.
pub fn read_table<R: Read>(table: &Table, reader: R) -> Result<TableData, DataError> {
    let csv_error = |e: csv::Error| DataError::Csv {
        table: table.name.clone(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    let expected: Vec<String> = table.columns.iter().map(|c| c.name.clone()).collect();
    if header != expected {
        return Err(DataError::HeaderMismatch {
            table: table.name.clone(),
            expected,
            found: header,
        });
    }
    let mut rows = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let row = record
            .iter()
            .zip(&table.columns)
            .map(|(cell, column)| {
                Value::parse(cell, column.value_kind).ok_or_else(|| DataError::BadCell {
                    table: table.name.clone(),
                    row: row_idx + 1,
                    column: column.name.clone(),
                    value: cell.to_string(),
                    kind: column.value_kind,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(TableData {
        name: table.name.clone(),
        header,
        rows,
    })
}

/// All tables of a schema, loaded from `<dir>/<table>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    tables: Vec<TableData>,
}

impl Dataset {
    pub fn new(tables: Vec<TableData>) -> Self {
        Dataset { tables }
    }

    pub fn tables(&self) -> &[TableData] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&TableData> {
        self.tables
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
    }
}

pub fn load_dataset(directory: &Path, schema: &Schema) -> Result<Dataset, DataError> {
    let mut tables = Vec::with_capacity(schema.tables().len());
    for table in schema.tables() {
        let path = directory.join(format!("{}.csv", table.name));
        let file = File::open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                DataError::MissingFile {
                    table: table.name.clone(),
                    path: path.clone(),
                }
            } else {
                DataError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                }
            }
        })?;
        tables.push(read_table(table, file)?);
    }
    Ok(Dataset { tables })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub columns: Vec<ColumnRef>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultSet {
    fn headers(&self, qualify: bool) -> Vec<String> {
        self.columns
            .iter()
            .map(|c| {
                if qualify {
                    c.to_string()
                } else {
                    c.column.clone()
                }
            })
            .collect()
    }

    /// RFC 4180 CSV with a header row.
    pub fn to_csv(&self, qualify: bool) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(self.headers(qualify))
            .expect("in-memory write");
        for row in &self.rows {
            wtr.write_record(row.iter().map(Value::to_string))
                .expect("in-memory write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Left-aligned columns separated by two spaces, no trailing blanks.
    pub fn to_table(&self, qualify: bool) -> String {
        let headers = self.headers(qualify);
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Value::to_string).collect())
            .collect();
        let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |fields: &[String]| {
            let padded: Vec<String> = fields
                .iter()
                .zip(&widths)
                .map(|(f, w)| format!("{f:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = line(&headers);
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(&rule));
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

// (position in plan, column index)
type Slot = (usize, usize);

struct Compiled<'d> {
    tables: Vec<&'d TableData>,
    select: Vec<Slot>,
    // join conditions grouped by the loop depth at which both sides are bound
    joins_at: Vec<Vec<(Slot, Slot)>>,
    predicate: Option<Predicate<Slot>>,
}

impl Compiled<'_> {
    fn value(&self, rows: &[usize], (t, c): Slot) -> &Value {
        &self.tables[t].rows[rows[t]][c]
    }

    fn holds(&self, rows: &[usize], predicate: &Predicate<Slot>) -> bool {
        match predicate {
            Predicate::Comparison {
                column,
                op,
                literal,
            } => self
                .value(rows, *column)
                .compare_literal(literal)
                .is_some_and(|ord| op.holds(ord)),
            Predicate::Connective { op, left, right } => match op {
                crate::ir::LogicalOp::And => self.holds(rows, left) && self.holds(rows, right),
                crate::ir::LogicalOp::Or => self.holds(rows, left) || self.holds(rows, right),
            },
        }
    }

    fn run(&self, depth: usize, rows: &mut Vec<usize>, out: &mut Vec<Vec<Value>>) {
        if depth == self.tables.len() {
            if self.predicate.as_ref().is_none_or(|p| self.holds(rows, p)) {
                out.push(
                    self.select
                        .iter()
                        .map(|&s| self.value(rows, s).clone())
                        .collect(),
                );
            }
            return;
        }
        for r in 0..self.tables[depth].rows.len() {
            rows.push(r);
            let joined = self.joins_at[depth]
                .iter()
                .all(|&(a, b)| self.value(rows, a).sql_eq(self.value(rows, b)));
            if joined {
                self.run(depth + 1, rows, out);
            }
            rows.pop();
        }
    }
}

/// Evaluate a resolved query: the cross product of the plan's tables (loops
/// nested in plan order) filtered by join conditions and the predicate, then
/// projected. Comparisons involving null are false.
pub fn execute(rq: &ResolvedQuery, ds: &Dataset) -> Result<ResultSet, ExecError> {
    let plan = &rq.join_plan;
    let tables = plan
        .tables
        .iter()
        .map(|name| {
            ds.table(name)
                .ok_or_else(|| ExecError::MissingTable(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let slot = |table: &str, column: &str| -> Result<Slot, ExecError> {
        let missing = || ExecError::MissingColumn(ColumnRef::new(table, column));
        let t = plan
            .tables
            .iter()
            .position(|n| n.eq_ignore_ascii_case(table))
            .ok_or_else(missing)?;
        let c = tables[t].column_index(column).ok_or_else(missing)?;
        Ok((t, c))
    };

    let select = rq
        .select_refs
        .iter()
        .map(|r| slot(&r.table, &r.column))
        .collect::<Result<Vec<_>, _>>()?;
    let mut joins_at = vec![Vec::new(); tables.len()];
    for cond in &plan.conditions {
        let a = slot(&cond.left_table, &cond.left_column)?;
        let b = slot(&cond.right_table, &cond.right_column)?;
        joins_at[a.0.max(b.0)].push((a, b));
    }
    let predicate = match &rq.predicate {
        Some(p) => Some(p.try_map(&mut |r: &ColumnRef, _, _| slot(&r.table, &r.column))?),
        None => None,
    };

    let compiled = Compiled {
        tables,
        select,
        joins_at,
        predicate,
    };
    let mut rows = Vec::new();
    compiled.run(0, &mut Vec::with_capacity(compiled.tables.len()), &mut rows);
    Ok(ResultSet {
        columns: rq.select_refs.clone(),
        rows,
    })
}
