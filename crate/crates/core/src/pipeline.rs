//! Text-to-SQL pipeline: tokenize, parse, resolve, render.

use thiserror::Error;

use crate::graph::{build_graph, SchemaGraph};
use crate::ir::QueryIR;
use crate::lexer::{generate_lexicon, tokenize, LexError, Lexicon, LexiconError, Token};
use crate::parser::{parse, ParseError};
use crate::query::{generate_sql, resolve, ResolveError, ResolvedQuery, SqlQuery};
use crate::schema::Schema;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

/// Every intermediate product of one translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub tokens: Vec<Token>,
    pub ir: QueryIR,
    pub resolved: ResolvedQuery,
    pub sql: SqlQuery,
}

/// Schema plus everything derived from it once.
#[derive(Debug, Clone)]
pub struct Translator {
    schema: Schema,
    graph: SchemaGraph,
    lexicon: Lexicon,
}

impl Translator {
    pub fn new(schema: Schema) -> Result<Self, LexiconError> {
        let lexicon = generate_lexicon(&schema)?;
        let graph = build_graph(&schema);
        Ok(Translator {
            schema,
            graph,
            lexicon,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn graph(&self) -> &SchemaGraph {
        &self.graph
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Tokenize and parse only.
    pub fn to_ir(&self, query: &str) -> Result<(Vec<Token>, QueryIR), TranslateError> {
        let tokens = tokenize(query, &self.lexicon)?;
        let ir = parse(&tokens)?;
        Ok((tokens, ir))
    }

    pub fn translate(&self, query: &str) -> Result<Translation, TranslateError> {
        let (tokens, ir) = self.to_ir(query)?;
        let resolved = resolve(&ir, &self.schema, &self.graph)?;
        let sql = generate_sql(&resolved);
        Ok(Translation {
            tokens,
            ir,
            resolved,
            sql,
        })
    }
}
