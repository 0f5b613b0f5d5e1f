//! Command-line driver: loads the schema (plus data and speech models when
//! asked), then translates one query, a file of phoneme utterances, or an
//! interactive stream of queries.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, ValueEnum};
use nlsql_core::speech::{load_models, parse_observations, SpeechModels};
use nlsql_core::{execute, ir_to_text, load_dataset, load_schema, Dataset, Translator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Sql,
    Ir,
    Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

/// Translate restricted English (or decoded phoneme streams) into SQL.
#[derive(Debug, Clone, Parser)]
#[command(name = "nlsql", version)]
#[command(group(ArgGroup::new("input").required(true).args(["query", "phonemes", "repl"])))]
pub struct Cli {
    /// Schema configuration (TOML).
    #[arg(long, value_name = "PATH")]
    pub schema: PathBuf,

    /// Directory holding one `<table>.csv` per schema table.
    #[arg(long, value_name = "DIR", required_if_eq("emit", "rows"))]
    pub data: Option<PathBuf>,

    /// Speech model configuration (TOML).
    #[arg(long, value_name = "PATH")]
    pub models: Option<PathBuf>,

    /// A single English query.
    #[arg(long, value_name = "TEXT")]
    pub query: Option<String>,

    /// File of phoneme utterances, one per line.
    #[arg(long, value_name = "PATH", requires = "models")]
    pub phonemes: Option<PathBuf>,

    /// Read queries from standard input, one per line.
    #[arg(long)]
    pub repl: bool,

    #[arg(long, value_enum, default_value_t = Emit::Sql)]
    pub emit: Emit,

    /// Layout for `--emit rows`.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const TRANSLATE: i32 = 4;
    pub const DECODE: i32 = 5;
    pub const EXEC: i32 = 6;
}

/// A failure together with the exit status it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn read_file(path: &Path, what: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        Failure::new(
            exit::CONFIG,
            format!("cannot read {what} `{}`: {e}", path.display()),
        )
    })
}

/// Everything loaded before the first query is handled.
pub struct Session {
    translator: Translator,
    data: Option<Dataset>,
    models: Option<SpeechModels>,
    emit: Emit,
    format: Format,
}

impl Session {
    pub fn load(cli: &Cli) -> Result<Self, Failure> {
        let schema_text = read_file(&cli.schema, "schema")?;
        let schema = load_schema(&schema_text)
            .map_err(|e| Failure::new(exit::CONFIG, format!("{}: {e}", cli.schema.display())))?;
        let data = match (&cli.data, cli.emit) {
            (Some(dir), Emit::Rows) => {
                Some(load_dataset(dir, &schema).map_err(|e| Failure::new(exit::CONFIG, e))?)
            }
            _ => None,
        };
        let models = match &cli.models {
            Some(path) => Some(
                load_models(&read_file(path, "models")?)
                    .map_err(|e| Failure::new(exit::CONFIG, format!("{}: {e}", path.display())))?,
            ),
            None => None,
        };
        let translator = Translator::new(schema).map_err(|e| Failure::new(exit::CONFIG, e))?;
        Ok(Session {
            translator,
            data,
            models,
            emit: cli.emit,
            format: cli.format,
        })
    }

    /// The artifact for one English query, newline-terminated.
    pub fn answer(&self, query: &str) -> Result<String, Failure> {
        let out = self
            .translator
            .translate(query)
            .map_err(|e| Failure::new(exit::TRANSLATE, e))?;
        Ok(match self.emit {
            Emit::Sql => format!("{}\n", out.sql.text),
            Emit::Ir => format!("{}\n", ir_to_text(&out.ir)),
            Emit::Rows => {
                let data = self.data.as_ref().expect("rows mode loads data");
                let rows = execute(&out.resolved, data).map_err(|e| Failure::new(exit::EXEC, e))?;
                let qualify = out.resolved.join_plan.tables.len() > 1;
                match self.format {
                    Format::Table => rows.to_table(qualify),
                    Format::Csv => rows.to_csv(qualify),
                }
            }
        })
    }

    /// Decode one utterance to English text.
    pub fn decode(&self, line: &str) -> Result<String, Failure> {
        let models = self.models.as_ref().expect("phoneme mode loads models");
        let observations = parse_observations(line);
        if let Some(unknown) = observations.iter().find(|o| !models.knows_symbol(o)) {
            return Err(Failure::new(
                exit::DECODE,
                format!("unknown phoneme symbol `{unknown}`"),
            ));
        }
        models
            .decode(&observations)
            .map(|d| d.text())
            .map_err(|e| Failure::new(exit::DECODE, e))
    }
}

fn report(stderr: &mut dyn Write, context: Option<usize>, failure: &Failure) {
    let _ = match context {
        Some(line) => writeln!(stderr, "error: line {line}: {failure}"),
        None => writeln!(stderr, "error: {failure}"),
    };
}

/// Run the tool; returns the process exit status.
pub fn run(
    cli: &Cli,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    prompt: bool,
) -> i32 {
    let session = match Session::load(cli) {
        Ok(s) => s,
        Err(f) => {
            report(stderr, None, &f);
            return f.code;
        }
    };
    let emit = |text: &str, stdout: &mut dyn Write| -> Result<(), Failure> {
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Failure::new(exit::CONFIG, format!("cannot write output: {e}")))
    };

    if let Some(query) = &cli.query {
        return match session.answer(query).and_then(|text| emit(&text, stdout)) {
            Ok(()) => exit::OK,
            Err(f) => {
                report(stderr, None, &f);
                f.code
            }
        };
    }

    if let Some(path) = &cli.phonemes {
        let content = match read_file(path, "phoneme file") {
            Ok(c) => c,
            Err(f) => {
                report(stderr, None, &f);
                return f.code;
            }
        };
        let mut status = exit::OK;
        for (n, line) in content
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let result = session
                .decode(line)
                .and_then(|text| session.answer(&text))
                .and_then(|text| emit(&text, stdout));
            if let Err(f) = result {
                report(stderr, Some(n + 1), &f);
                if status == exit::OK {
                    status = f.code;
                }
            }
        }
        return status;
    }

    let mut line = String::new();
    let mut number = 0;
    loop {
        if prompt {
            let _ = write!(stderr, "nlsql> ");
            let _ = stderr.flush();
        }
        line.clear();
        match stdin.read_line(&mut line) {
            Ok(0) => return exit::OK,
            Ok(_) => {}
            Err(e) => {
                report(
                    stderr,
                    None,
                    &Failure::new(exit::CONFIG, format!("cannot read input: {e}")),
                );
                return exit::CONFIG;
            }
        }
        number += 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Err(f) = session
            .answer(line.trim())
            .and_then(|text| emit(&text, stdout))
        {
            report(stderr, Some(number), &f);
        }
    }
}
