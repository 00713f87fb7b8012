//! `exfree`: run phase units, sweeps, Bob programs and the verification suites from
//! the command line.
//!
//! Reports are JSON objects with a top-level `"ok"`; sweeps are CSV. Exit status is 0
//! on success, 1 on invalid input and 2 when a check inside a report fails.

mod args;
mod commands;
mod descriptor;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::{CliError, Output};

fn emit(out: &Output, path: Option<&std::path::Path>) -> Result<(), CliError> {
    let text = out.render();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn code(err: &CliError) -> u8 {
    match err {
        CliError::Validation(_) => 1,
        CliError::Invariant(_) => 2,
    }
}

fn fail(err: &CliError) -> u8 {
    let report = serde_json::json!({ "ok": false, "error": err.to_string(), "kind": err.kind() });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    code(err)
}

fn run_one(cmd: &args::Command, out: Option<&std::path::Path>) -> u8 {
    match commands::run(cmd).and_then(|o| emit(&o, out).map(|_| o.ok())) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let status = match (&cli.runs_descriptor, &cli.command) {
        (Some(path), None) => match descriptor::load(path) {
            Ok(runs) => runs
                .iter()
                .map(|r| match r.to_command() {
                    Ok(cmd) => run_one(&cmd, r.output.as_deref()),
                    Err(e) => fail(&e),
                })
                .max()
                .unwrap_or(0),
            Err(e) => fail(&e),
        },
        (None, Some(cmd)) => run_one(cmd, cmd.out_path()),
        (Some(_), Some(_)) => fail(&CliError::Validation(
            "give either a subcommand or --runs-descriptor, not both".into(),
        )),
        (None, None) => fail(&CliError::Validation("no subcommand given".into())),
    };
    ExitCode::from(status)
}
