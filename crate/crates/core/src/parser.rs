//! Predictive parser with syntax-directed translation into [`QueryIR`].
//!
//! ```text
//! query       := VERB_SELECT select_list [OF TABLE] [where_part]
//! select_list := COLUMN (LOGICAL_AND COLUMN)*
//! where_part  := WHERE_INTRO condition ((LOGICAL_AND | LOGICAL_OR) condition)*
//! condition   := COLUMN COMPARATOR literal
//! literal     := NUMBER | STRING_LITERAL
//! ```
//!
//! Connectives are left-associative with equal precedence.

use std::fmt;

use thiserror::Error;

use crate::ir::{CompareOp, Literal, LogicalOp, Number, Predicate, QueryIR};
use crate::lexer::{Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at position {position}: expected {expected}, found {found}")]
pub struct ParseError {
    /// Word index of the offending token, or one past the last word.
    pub position: usize,
    pub expected: String,
    pub found: String,
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

enum Found<'t> {
    Token(&'t Token),
    End,
}

impl fmt::Display for Found<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Found::Token(t) => write!(f, "{t}"),
            Found::End => f.write_str("end of query"),
        }
    }
}

impl<'t> Parser<'t> {
    fn peek_kind(&self, ahead: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + ahead).map(|t| t.kind)
    }

    fn error_at(&self, index: usize, expected: impl Into<String>) -> ParseError {
        let (position, found) = match self.tokens.get(index) {
            Some(t) => (t.position, Found::Token(t)),
            None => (self.tokens.last().map_or(0, |t| t.position + 1), Found::End),
        };
        ParseError {
            position,
            expected: expected.into(),
            found: found.to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.error_at(self.pos, kind.to_string())),
        }
    }

    fn query(&mut self) -> Result<QueryIR, ParseError> {
        self.expect(TokenKind::VerbSelect)?;
        let select_columns = self.select_list()?;
        let scope_table = if self.peek_kind(0) == Some(TokenKind::Of) {
            self.pos += 1;
            Some(self.expect(TokenKind::Table)?.target.clone())
        } else {
            None
        };
        let predicate = if self.peek_kind(0) == Some(TokenKind::WhereIntro) {
            self.pos += 1;
            Some(self.where_part()?)
        } else {
            None
        };
        if self.pos < self.tokens.len() {
            let expected = match (scope_table.is_some(), predicate.is_some()) {
                (_, true) => "LOGICAL_AND, LOGICAL_OR or end of query",
                (true, false) => "WHERE_INTRO or end of query",
                (false, false) => "LOGICAL_AND, OF, WHERE_INTRO or end of query",
            };
            return Err(self.error_at(self.pos, expected));
        }
        Ok(QueryIR {
            select_columns,
            scope_table,
            predicate,
        })
    }

    fn select_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut columns = vec![self.expect(TokenKind::Column)?.target.clone()];
        while self.peek_kind(0) == Some(TokenKind::LogicalAnd) {
            if self.peek_kind(1) != Some(TokenKind::Column) {
                return Err(self.error_at(self.pos + 1, TokenKind::Column.to_string()));
            }
            // `and <column> <comparator>` would be a condition, which must
            // follow WHERE_INTRO.
            if self.peek_kind(2) == Some(TokenKind::Comparator) {
                return Err(self.error_at(self.pos, "WHERE_INTRO before condition"));
            }
            let column = &self.tokens[self.pos + 1];
            if columns.contains(&column.target) {
                return Err(ParseError {
                    position: column.position,
                    expected: "distinct select column".into(),
                    found: format!("duplicate {column}"),
                });
            }
            columns.push(column.target.clone());
            self.pos += 2;
        }
        Ok(columns)
    }

    fn where_part(&mut self) -> Result<Predicate, ParseError> {
        let mut predicate = self.condition()?;
        loop {
            let op = match self.peek_kind(0) {
                Some(TokenKind::LogicalAnd) => LogicalOp::And,
                Some(TokenKind::LogicalOr) => LogicalOp::Or,
                _ => return Ok(predicate),
            };
            self.pos += 1;
            let right = self.condition()?;
            predicate = Predicate::connect(op, predicate, right);
        }
    }

    fn condition(&mut self) -> Result<Predicate, ParseError> {
        let column = self.expect(TokenKind::Column)?.target.clone();
        let op_token = self.expect(TokenKind::Comparator)?;
        let op = CompareOp::from_symbol(&op_token.target)
            .expect("lexer only emits known comparator symbols");
        let literal = match self.tokens.get(self.pos) {
            Some(t) if t.kind == TokenKind::Number => {
                let n =
                    Number::parse(&t.target).ok_or_else(|| self.error_at(self.pos, "NUMBER"))?;
                Literal::Number(n)
            }
            Some(t) if t.kind == TokenKind::StringLiteral => Literal::Text(t.target.clone()),
            _ => return Err(self.error_at(self.pos, "NUMBER or STRING_LITERAL")),
        };
        self.pos += 1;
        Ok(Predicate::comparison(column, op, literal))
    }
}

/// Validate a token stream against the grammar and translate it to IR.
pub fn parse(tokens: &[Token]) -> Result<QueryIR, ParseError> {
    Parser { tokens, pos: 0 }.query()
}
