use std::io::{self, IsTerminal};
use std::process::ExitCode;

use clap::Parser;
use nlsql_cli::{exit, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let stdin = io::stdin();
    let prompt = cli.repl && stdin.is_terminal();
    let status = run(
        &cli,
        &mut stdin.lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
        prompt,
    );
    ExitCode::from(status as u8)
}
