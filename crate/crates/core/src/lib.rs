//! Rule-based translation of restricted English database queries into SQL.
//!
//! Queries arrive either as text or as a phoneme stream decoded against word
//! HMMs under a grammar automaton. Text is tokenized with a lexicon generated
//! from the database schema, parsed into an intermediate representation,
//! resolved against the schema graph (which supplies the FROM tables and join
//! conditions) and rendered as SQL. A small CSV-backed executor can run the
//! resolved query.
//!
//! ```
//! use nlsql_core::{load_schema, Translator};
//!
//! let schema = load_schema(r#"
//! [[tables]]
//! name = "branch"
//! columns = [{ name = "branch_name", type = "text" }, { name = "assets", type = "real" }]
//! "#).unwrap();
//! let translator = Translator::new(schema).unwrap();
//! let out = translator.translate("get the branch_name whose assets is at least 500").unwrap();
//! assert_eq!(out.sql.text, "SELECT branch_name FROM branch WHERE assets >= 500");
//! ```

pub mod exec;
pub mod graph;
pub mod ir;
pub mod lexer;
pub mod parser;
pub mod pipeline;
pub mod query;
pub mod schema;
pub mod speech;

pub use exec::{execute, load_dataset, DataError, Dataset, ExecError, ResultSet, Value};
pub use graph::{build_graph, join_path, JoinCondition, JoinError, JoinPlan, SchemaGraph};
pub use ir::{ir_to_text, CompareOp, Literal, LogicalOp, Number, Predicate, QueryIR};
pub use lexer::{generate_lexicon, tokenize, LexError, Lexicon, LexiconError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use pipeline::{TranslateError, Translation, Translator};
pub use query::{
    extract_clauses, generate_sql, resolve, ColumnRef, ResolveError, ResolvedQuery, SqlQuery,
};
pub use schema::{load_schema, Column, Schema, SchemaError, Table, TableKind, ValueKind};
