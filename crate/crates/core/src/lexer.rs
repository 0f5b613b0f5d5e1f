//! Lexicon generation and query tokenization.
//!
//! The lexicon pairs a fixed English keyword table with the identifiers of a
//! schema. Tokenizing maps each source word either to a target-language
//! lexeme (`get` becomes `select`, `greater than` becomes `>`) or to nothing
//! (noise words such as `the` are dropped).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::schema::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    VerbSelect,
    WhereIntro,
    Column,
    Table,
    Comparator,
    LogicalAnd,
    LogicalOr,
    Number,
    StringLiteral,
    Of,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenKind::VerbSelect => "VERB_SELECT",
            TokenKind::WhereIntro => "WHERE_INTRO",
            TokenKind::Column => "COLUMN",
            TokenKind::Table => "TABLE",
            TokenKind::Comparator => "COMPARATOR",
            TokenKind::LogicalAnd => "LOGICAL_AND",
            TokenKind::LogicalOr => "LOGICAL_OR",
            TokenKind::Number => "NUMBER",
            TokenKind::StringLiteral => "STRING_LITERAL",
            TokenKind::Of => "OF",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source word(s) as written, joined by single spaces.
    pub source: String,
    /// Mapped lexeme: operator, keyword, schema spelling or literal value.
    pub target: String,
    /// 0-based index of the first source word.
    pub position: usize,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.target)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    #[error("empty query")]
    EmptyQuery,
    #[error("unknown word `{word}` at position {position}")]
    UnknownWord { word: String, position: usize },
    #[error("unterminated string literal at position {position}")]
    UnterminatedString { position: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("schema identifier `{0}` collides with a reserved word")]
    ReservedWord(String),
    #[error("identifier `{0}` names both a table and a column")]
    TableColumnClash(String),
    #[error("column `{first}` is also spelled `{second}`")]
    InconsistentSpelling { first: String, second: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entry {
    Keyword(TokenKind, &'static str),
    Noise,
}

const KEYWORDS: &[(&str, TokenKind, &str)] = &[
    ("get", TokenKind::VerbSelect, "select"),
    ("show", TokenKind::VerbSelect, "select"),
    ("find", TokenKind::VerbSelect, "select"),
    ("list", TokenKind::VerbSelect, "select"),
    ("display", TokenKind::VerbSelect, "select"),
    ("give", TokenKind::VerbSelect, "select"),
    ("whose", TokenKind::WhereIntro, "where"),
    ("where", TokenKind::WhereIntro, "where"),
    ("with", TokenKind::WhereIntro, "where"),
    ("having", TokenKind::WhereIntro, "where"),
    ("and", TokenKind::LogicalAnd, "and"),
    ("or", TokenKind::LogicalOr, "or"),
    ("of", TokenKind::Of, "of"),
    ("greater than", TokenKind::Comparator, ">"),
    ("less than", TokenKind::Comparator, "<"),
    ("equal to", TokenKind::Comparator, "="),
    ("equals", TokenKind::Comparator, "="),
    ("not equal to", TokenKind::Comparator, "<>"),
    ("at least", TokenKind::Comparator, ">="),
    ("greater than or equal to", TokenKind::Comparator, ">="),
    ("at most", TokenKind::Comparator, "<="),
    ("less than or equal to", TokenKind::Comparator, "<="),
];

pub const NOISE_WORDS: &[&str] = &["the", "all", "is", "are", "a", "an", "please", "me"];

/// Schema identifiers plus the fixed keyword and noise tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    // lowercase -> schema spelling
    columns: BTreeMap<String, String>,
    tables: BTreeMap<String, String>,
    keywords: HashMap<String, Entry>,
    max_phrase_words: usize,
}

/// Every single word that may appear in a keyword phrase or the noise list.
pub fn reserved_words() -> BTreeSet<&'static str> {
    KEYWORDS
        .iter()
        .flat_map(|(phrase, _, _)| phrase.split(' '))
        .chain(NOISE_WORDS.iter().copied())
        .collect()
}

pub fn generate_lexicon(schema: &Schema) -> Result<Lexicon, LexiconError> {
    let reserved = reserved_words();
    let mut tables = BTreeMap::new();
    for table in schema.tables() {
        let key = table.name.to_ascii_lowercase();
        if reserved.contains(key.as_str()) {
            return Err(LexiconError::ReservedWord(table.name.clone()));
        }
        tables.insert(key, table.name.clone());
    }
    let mut columns: BTreeMap<String, String> = BTreeMap::new();
    for column in schema.tables().iter().flat_map(|t| &t.columns) {
        let key = column.name.to_ascii_lowercase();
        if reserved.contains(key.as_str()) {
            return Err(LexiconError::ReservedWord(column.name.clone()));
        }
        if tables.contains_key(&key) {
            return Err(LexiconError::TableColumnClash(column.name.clone()));
        }
        if let Some(existing) = columns.get(&key) {
            if *existing != column.name {
                return Err(LexiconError::InconsistentSpelling {
                    first: existing.clone(),
                    second: column.name.clone(),
                });
            }
        } else {
            columns.insert(key, column.name.clone());
        }
    }

    let mut keywords = HashMap::new();
    let mut max_phrase_words = 1;
    for &(phrase, kind, target) in KEYWORDS {
        max_phrase_words = max_phrase_words.max(phrase.split(' ').count());
        keywords.insert(phrase.to_string(), Entry::Keyword(kind, target));
    }
    for &word in NOISE_WORDS {
        keywords.insert(word.to_string(), Entry::Noise);
    }
    Ok(Lexicon {
        columns,
        tables,
        keywords,
        max_phrase_words,
    })
}

impl Lexicon {
    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.values().map(String::as_str)
    }

    pub fn table_names(&self) -> impl Iterator<Item = &str> {
        self.tables.values().map(String::as_str)
    }

    pub fn noise_words(&self) -> &'static [&'static str] {
        NOISE_WORDS
    }

    pub fn is_noise(&self, word: &str) -> bool {
        self.keywords.get(&word.to_ascii_lowercase()) == Some(&Entry::Noise)
    }

    /// Keyword phrases with their token kind and target lexeme.
    pub fn keyword_phrases(&self) -> impl Iterator<Item = (&'static str, TokenKind, &'static str)> {
        KEYWORDS.iter().copied()
    }
}

#[derive(Debug)]
enum Word<'a> {
    Plain(&'a str),
    Quoted(&'a str),
}

fn split_words(text: &str) -> Result<Vec<Word<'_>>, LexError> {
    let mut words = Vec::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        let first = rest.chars().next().unwrap();
        if first == '\'' || first == '"' {
            let body = &rest[1..];
            let end = body.find(first).ok_or(LexError::UnterminatedString {
                position: words.len(),
            })?;
            words.push(Word::Quoted(&body[..end]));
            rest = &body[end + 1..];
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            words.push(Word::Plain(&rest[..end]));
            rest = &rest[end..];
        }
        rest = rest.trim_start();
    }
    Ok(words)
}

/// Optional sign, digits, optional fractional part.
pub fn is_decimal_numeral(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    all_digits(int) && frac.is_none_or(all_digits)
}

pub fn tokenize(query_text: &str, lexicon: &Lexicon) -> Result<Vec<Token>, LexError> {
    let words = split_words(query_text)?;
    if words.is_empty() {
        return Err(LexError::EmptyQuery);
    }
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let plain = match words[i] {
            Word::Quoted(body) => {
                tokens.push(Token {
                    kind: TokenKind::StringLiteral,
                    source: body.to_string(),
                    target: body.to_string(),
                    position: i,
                });
                i += 1;
                continue;
            }
            Word::Plain(w) => w,
        };

        // Longest keyword phrase over the following run of plain words.
        let run: Vec<&str> = words[i..]
            .iter()
            .take(lexicon.max_phrase_words)
            .map_while(|w| match w {
                Word::Plain(p) => Some(*p),
                Word::Quoted(_) => None,
            })
            .collect();
        let phrase = (1..=run.len()).rev().find_map(|len| {
            let key = run[..len].join(" ").to_ascii_lowercase();
            lexicon.keywords.get(&key).map(|entry| (len, *entry))
        });
        if let Some((len, entry)) = phrase {
            if let Entry::Keyword(kind, target) = entry {
                tokens.push(Token {
                    kind,
                    source: run[..len].join(" "),
                    target: target.to_string(),
                    position: i,
                });
            }
            i += len;
            continue;
        }

        let key = plain.to_ascii_lowercase();
        let (kind, target) = if let Some(name) = lexicon.columns.get(&key) {
            (TokenKind::Column, name.clone())
        } else if let Some(name) = lexicon.tables.get(&key) {
            (TokenKind::Table, name.clone())
        } else if is_decimal_numeral(plain) {
            (TokenKind::Number, plain.to_string())
        } else {
            return Err(LexError::UnknownWord {
                word: plain.to_string(),
                position: i,
            });
        };
        tokens.push(Token {
            kind,
            source: plain.to_string(),
            target,
            position: i,
        });
        i += 1;
    }
    Ok(tokens)
}
