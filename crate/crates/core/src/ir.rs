//! Intermediate query representation produced by the parser.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Gt,
    Lt,
    Eq,
    Ge,
    Le,
    Ne,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Gt => ">",
            CompareOp::Lt => "<",
            CompareOp::Eq => "=",
            CompareOp::Ge => ">=",
            CompareOp::Le => "<=",
            CompareOp::Ne => "<>",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            ">" => CompareOp::Gt,
            "<" => CompareOp::Lt,
            "=" => CompareOp::Eq,
            ">=" => CompareOp::Ge,
            "<=" => CompareOp::Le,
            "<>" => CompareOp::Ne,
            _ => return None,
        })
    }

    /// Ordering comparisons only make sense on numeric columns.
    pub fn is_ordering(self) -> bool {
        !matches!(self, CompareOp::Eq | CompareOp::Ne)
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Gt => ord == Greater,
            CompareOp::Lt => ord == Less,
            CompareOp::Eq => ord == Equal,
            CompareOp::Ge => ord != Less,
            CompareOp::Le => ord != Greater,
            CompareOp::Ne => ord != Equal,
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalOp {
    And,
    Or,
}

impl LogicalOp {
    fn lower(self) -> &'static str {
        match self {
            LogicalOp::And => "and",
            LogicalOp::Or => "or",
        }
    }

    fn upper(self) -> &'static str {
        match self {
            LogicalOp::And => "AND",
            LogicalOp::Or => "OR",
        }
    }
}

/// Decimal numeral kept in canonical text form: no `+`, no leading zeros,
/// no trailing fractional zeros, and `0` for every spelling of zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Number(String);

impl Number {
    pub fn parse(numeral: &str) -> Option<Number> {
        if !crate::lexer::is_decimal_numeral(numeral) {
            return None;
        }
        let (negative, digits) = match numeral.as_bytes()[0] {
            b'-' => (true, &numeral[1..]),
            b'+' => (false, &numeral[1..]),
            _ => (false, numeral),
        };
        let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
        let int = int.trim_start_matches('0');
        let frac = frac.trim_end_matches('0');
        let mut out = String::new();
        if negative && !(int.is_empty() && frac.is_empty()) {
            out.push('-');
        }
        out.push_str(if int.is_empty() { "0" } else { int });
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        Some(Number(out))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn value(&self) -> f64 {
        self.0.parse().expect("canonical numeral parses")
    }

    pub fn is_integral(&self) -> bool {
        !self.0.contains('.')
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Number(Number),
    Text(String),
}

impl fmt::Display for Literal {
    /// Numbers canonical, strings single-quoted with embedded quotes doubled.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => write!(f, "{n}"),
            Literal::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

/// Boolean condition over columns of type `C`: plain names straight out of
/// the parser, table-qualified references after resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate<C = String> {
    Comparison {
        column: C,
        op: CompareOp,
        literal: Literal,
    },
    Connective {
        op: LogicalOp,
        left: Box<Predicate<C>>,
        right: Box<Predicate<C>>,
    },
}

impl<C> Predicate<C> {
    pub fn comparison(column: C, op: CompareOp, literal: Literal) -> Self {
        Predicate::Comparison {
            column,
            op,
            literal,
        }
    }

    pub fn connect(op: LogicalOp, left: Self, right: Self) -> Self {
        Predicate::Connective {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Columns in left-to-right order, repeats included.
    pub fn columns(&self) -> Vec<&C> {
        let mut out = Vec::new();
        self.visit(&mut |c, _, _| out.push(c));
        out
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a C, CompareOp, &'a Literal)) {
        match self {
            Predicate::Comparison {
                column,
                op,
                literal,
            } => f(column, *op, literal),
            Predicate::Connective { left, right, .. } => {
                left.visit(f);
                right.visit(f);
            }
        }
    }

    pub fn try_map<D, E>(
        &self,
        f: &mut impl FnMut(&C, CompareOp, &Literal) -> Result<D, E>,
    ) -> Result<Predicate<D>, E> {
        Ok(match self {
            Predicate::Comparison {
                column,
                op,
                literal,
            } => Predicate::Comparison {
                column: f(column, *op, literal)?,
                op: *op,
                literal: literal.clone(),
            },
            Predicate::Connective { op, left, right } => Predicate::Connective {
                op: *op,
                left: Box::new(left.try_map(f)?),
                right: Box::new(right.try_map(f)?),
            },
        })
    }

    pub fn contains_or(&self) -> bool {
        match self {
            Predicate::Comparison { .. } => false,
            Predicate::Connective { op, left, right } => {
                *op == LogicalOp::Or || left.contains_or() || right.contains_or()
            }
        }
    }

    /// Prefix form: `>(balance, 3000)`, `and(L, R)`.
    pub fn prefix_text(&self, column: &impl Fn(&C) -> String) -> String {
        match self {
            Predicate::Comparison {
                column: c,
                op,
                literal,
            } => format!("{op}({}, {literal})", column(c)),
            Predicate::Connective { op, left, right } => format!(
                "{}({}, {})",
                op.lower(),
                left.prefix_text(column),
                right.prefix_text(column)
            ),
        }
    }

    /// SQL infix form. Sub-expressions are parenthesized wherever SQL
    /// precedence (AND over OR) would otherwise regroup the parsed tree.
    pub fn infix_text(&self, column: &impl Fn(&C) -> String) -> String {
        match self {
            Predicate::Comparison {
                column: c,
                op,
                literal,
            } => format!("{} {op} {literal}", column(c)),
            Predicate::Connective { op, left, right } => {
                let left_text = match left.as_ref() {
                    Predicate::Connective { op: inner, .. } if inner != op => {
                        format!("({})", left.infix_text(column))
                    }
                    _ => left.infix_text(column),
                };
                let right_text = match right.as_ref() {
                    Predicate::Connective { .. } => format!("({})", right.infix_text(column)),
                    Predicate::Comparison { .. } => right.infix_text(column),
                };
                format!("{left_text} {} {right_text}", op.upper())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryIR {
    pub select_columns: Vec<String>,
    pub scope_table: Option<String>,
    pub predicate: Option<Predicate>,
}

/// Canonical text of an IR, e.g. `VP[select(customer_name), where(>(balance, 3000))]`.
/// A scope table, when present, prints as `of(table)` between the two parts.
pub fn ir_to_text(ir: &QueryIR) -> String {
    let mut out = format!("VP[select({})", ir.select_columns.join(", "));
    if let Some(table) = &ir.scope_table {
        out.push_str(&format!(", of({table})"));
    }
    if let Some(pred) = &ir.predicate {
        out.push_str(&format!(
            ", where({})",
            pred.prefix_text(&|c: &String| c.clone())
        ));
    }
    out.push(']');
    out
}

impl fmt::Display for QueryIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ir_to_text(self))
    }
}
