//! From IR to SQL: clause extraction, table resolution and rendering.

use std::fmt;

use thiserror::Error;

use crate::graph::{join_path, JoinError, JoinPlan, SchemaGraph};
use crate::ir::{CompareOp, Literal, Predicate, QueryIR};
use crate::schema::{Schema, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef {
            table: table.into(),
            column: column.into(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no table has a column named `{0}`")]
    UnknownColumn(String),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("table `{table}` has no column `{column}`")]
    NotInScope { table: String, column: String },
    #[error("type mismatch on `{column}`: {detail}")]
    TypeMismatch { column: ColumnRef, detail: String },
    #[error(transparent)]
    Join(#[from] JoinError),
}

/// IR with every column bound to its owning table, plus the join plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedQuery {
    pub select_refs: Vec<ColumnRef>,
    pub predicate: Option<Predicate<ColumnRef>>,
    pub join_plan: JoinPlan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqlQuery {
    pub text: String,
    pub tables: Vec<String>,
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// SELECT and WHERE clauses with unqualified column names.
pub fn extract_clauses(ir: &QueryIR) -> (String, Option<String>) {
    let select = format!("SELECT {}", ir.select_columns.join(", "));
    let filter = ir
        .predicate
        .as_ref()
        .map(|p| format!("WHERE {}", p.infix_text(&|c: &String| c.clone())));
    (select, filter)
}

fn check_types(
    column: &ColumnRef,
    kind: ValueKind,
    op: CompareOp,
    literal: &Literal,
) -> Result<(), ResolveError> {
    let detail = match (kind.is_numeric(), literal) {
        (true, Literal::Text(_)) => format!("{kind} column compared with a string literal"),
        (false, Literal::Number(_)) => "text column compared with a number".to_string(),
        (false, Literal::Text(_)) if op.is_ordering() => {
            format!("comparison `{op}` needs a numeric column")
        }
        _ => return Ok(()),
    };
    Err(ResolveError::TypeMismatch {
        column: column.clone(),
        detail,
    })
}

pub fn resolve(
    ir: &QueryIR,
    schema: &Schema,
    graph: &SchemaGraph,
) -> Result<ResolvedQuery, ResolveError> {
    let scope = match &ir.scope_table {
        Some(name) => Some(
            schema
                .table(name)
                .ok_or_else(|| ResolveError::UnknownTable(name.clone()))?,
        ),
        None => None,
    };

    let bind = |name: &str| -> Result<(ColumnRef, ValueKind), ResolveError> {
        let table = match scope {
            Some(table) => table,
            None => {
                let owner = *schema
                    .tables_owning(name)
                    .first()
                    .ok_or_else(|| ResolveError::UnknownColumn(name.to_string()))?;
                schema.table(owner).expect("owner is a schema table")
            }
        };
        let column = table.column(name).ok_or_else(|| ResolveError::NotInScope {
            table: table.name.clone(),
            column: name.to_string(),
        })?;
        Ok((ColumnRef::new(&table.name, &column.name), column.value_kind))
    };

    let select_refs = ir
        .select_columns
        .iter()
        .map(|c| bind(c).map(|(r, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    let predicate = match &ir.predicate {
        Some(p) => Some(p.try_map(&mut |name, op, literal| {
            let (column, kind) = bind(name)?;
            check_types(&column, kind, op, literal)?;
            Ok::<_, ResolveError>(column)
        })?),
        None => None,
    };

    let mut required: Vec<&str> = Vec::new();
    let predicate_cols = predicate.as_ref().map(|p| p.columns()).unwrap_or_default();
    for r in select_refs.iter().chain(predicate_cols) {
        if !required.contains(&r.table.as_str()) {
            required.push(&r.table);
        }
    }
    let join_plan = join_path(graph, &required)?;
    Ok(ResolvedQuery {
        select_refs,
        predicate,
        join_plan,
    })
}

/// Render a resolved query as single-line SQL. Columns are qualified only
/// when more than one table is involved; join conditions follow the user's
/// predicate in the WHERE clause.
pub fn generate_sql(rq: &ResolvedQuery) -> SqlQuery {
    let qualify = rq.join_plan.tables.len() > 1;
    let name = |r: &ColumnRef| {
        if qualify {
            r.to_string()
        } else {
            r.column.clone()
        }
    };

    let select: Vec<String> = rq.select_refs.iter().map(name).collect();
    let mut text = format!(
        "SELECT {} FROM {}",
        select.join(", "),
        rq.join_plan.tables.join(", ")
    );

    let mut conjuncts = Vec::new();
    if let Some(p) = &rq.predicate {
        let rendered = p.infix_text(&name);
        if p.contains_or() && !rq.join_plan.conditions.is_empty() {
            conjuncts.push(format!("({rendered})"));
        } else {
            conjuncts.push(rendered);
        }
    }
    conjuncts.extend(rq.join_plan.conditions.iter().map(|c| c.to_string()));
    if !conjuncts.is_empty() {
        text.push_str(" WHERE ");
        text.push_str(&conjuncts.join(" AND "));
    }
    SqlQuery {
        text,
        tables: rq.join_plan.tables.clone(),
    }
}
