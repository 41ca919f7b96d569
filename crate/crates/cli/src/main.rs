use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use bmn_cli::{run, Cli};
use clap::Parser;

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let outcome = run(&cli.command);
    for line in &outcome.diagnostics {
        eprintln!("bmn {}: {line}", cli.command.name());
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", outcome.report.to_json()).context("writing report")?;
    Ok(ExitCode::from(outcome.exit_code as u8))
}
