//! The `bmn` command line: JSON configs in, JSON reports out.
//!
//! Exit codes: 0 success, 2 invalid input, 3 the analysis refused the rules
//! (for instance an exact solve on a chain that is not absorbing).

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

pub use commands::Failure;
pub use config::{Config, Invalid, Pickup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bmn", version, about = "Exact and simulated analysis of Beggar-my-neighbour style card games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo games of the randomized variant.
    Simulate(Options),
    /// Expected game length by solving the absorbing chain.
    Exact(Options),
    /// Nondegeneracy, the lemma conditions on G0 and reverse reachability.
    Check(Options),
    /// Cycle search in the deterministic classical game.
    Cycles(Options),
    /// Count the splits of the deck.
    Enumerate(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Exact(_) => "exact",
            Command::Check(_) => "check",
            Command::Cycles(_) => "cycles",
            Command::Enumerate(_) => "enumerate",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Simulate(o)
            | Command::Exact(o)
            | Command::Check(o)
            | Command::Cycles(o)
            | Command::Enumerate(o) => o,
        }
    }
}

/// Flags shared by every subcommand. Flags override the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Options {
    #[arg(long)]
    pub config: PathBuf,
    /// Probability that player one leads a trick.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub games: Option<u64>,
    #[arg(long)]
    pub deals: Option<u64>,
    #[arg(long)]
    pub move_cap: Option<u64>,
    #[arg(long)]
    pub left_size: Option<usize>,
    #[arg(long, value_enum)]
    pub pickup: Option<Pickup>,
    /// A split such as `L:J0,N3|R:Q1`, used instead of random deals.
    #[arg(long)]
    pub state: Option<String>,
    /// Width of the game-length histogram buckets (simulate).
    #[arg(long)]
    pub bucket_width: Option<u64>,
    /// Leader of the first trick in the deterministic game.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub first_leader: Option<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    /// Effective parameters after applying flags over the config.
    pub parameters: Value,
    pub config_digest: Option<String>,
    pub results: Value,
    pub wall_time_seconds: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub struct Outcome {
    pub exit_code: i32,
    pub report: Report,
    /// Human-readable diagnostics for standard error.
    pub diagnostics: Vec<String>,
}

pub fn run(command: &Command) -> Outcome {
    let started = Instant::now();
    let loaded = Config::load(&command.options().config);
    let digest = loaded.as_ref().ok().map(Config::digest);
    let result = loaded.map_err(Failure::Invalid).and_then(|c| commands::dispatch(command, &c));
    let (exit_code, parameters, results, diagnostics) = match result {
        Ok((parameters, results)) => (EXIT_OK, parameters, results, Vec::new()),
        Err(Failure::Invalid(errors)) => {
            let diagnostics = errors.iter().map(|e| e.to_string()).collect();
            let results = serde_json::json!({ "status": "invalid", "errors": errors });
            (EXIT_INVALID, Value::Null, results, diagnostics)
        }
        Err(Failure::Refused { message, parameters, results }) => (EXIT_REFUSED, parameters, results, vec![message]),
    };
    let report = Report {
        schema_version: config::SCHEMA_VERSION,
        command: command.name().to_string(),
        parameters,
        config_digest: digest,
        results,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    Outcome { exit_code, report, diagnostics }
}
