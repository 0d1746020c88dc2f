//! Command-line front end: argument parsing, command dispatch and rendering
//! of result documents as text or JSON.
//!
//! Exit codes: 0 on success, 1 when a checked identity fails, 2 on usage or
//! input errors.

pub mod args;
mod commands;
mod report;

use clap::Parser;

pub use args::{Cli, Format};
pub use report::Report;

/// What the binary prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A usage or input error; rendered as a structured error with exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return Outcome { code, stdout, stderr };
        }
    };
    execute(&cli)
}

/// Runs an already parsed command line.
pub fn execute(cli: &Cli) -> Outcome {
    let format = cli.global.format;
    match commands::dispatch(cli) {
        Ok(report) => Outcome {
            code: if report.passed { 0 } else { 1 },
            stdout: report.render(format),
            stderr: String::new(),
        },
        Err(UsageError(message)) => match format {
            Format::Json => Outcome {
                code: 2,
                stdout: report::error_document(&message),
                stderr: String::new(),
            },
            Format::Text => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {message}\n"),
            },
        },
    }
}
