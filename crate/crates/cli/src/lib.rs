//! Command-line driver for the medmine corpus pipeline.

pub mod args;
pub mod artifact;
pub mod commands;
pub mod config;
pub mod pipeline;

use clap::{CommandFactory, FromArgMatches};

use crate::args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a, seed).map(drop),
        Command::Stats(a) => commands::stats(a),
        Command::Normalize(a) => commands::normalize(a, seed).map(drop),
        Command::Pool(a) => commands::pool(a, seed),
        Command::Terms(a) => commands::terms(a, seed),
        Command::Fetch(a) => commands::fetch(a, seed),
        Command::Augment(a) => commands::augment(a, seed).map(drop),
        Command::Mix(a) => commands::mix(a, seed).map(drop),
        Command::Baseline(a) => commands::baseline(a, seed),
        Command::Eval(a) => commands::eval(a, seed).map(drop),
        Command::Pipeline(a) => commands::pipeline(a, seed),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cmd = Cli::command();
    let argv = match config::expand(argv, &cmd) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match cmd.try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_VALIDATION
        }
    }
}
