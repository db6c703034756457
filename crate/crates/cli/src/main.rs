//! Command-line front end for the `prolate-squeeze` library.
//!
//! ```text
//! prolate-squeeze <basis|variances|budget|simulate|verify>
//!                 --config <path> [--out <dir>] [--seed <u64>]
//! ```
//!
//! Every command reads the same JSON run configuration (see
//! [`config::RunConfig`] for the schema) and writes plot-ready artifacts
//! into the output directory. Exit codes: 0 on success, 1 when `verify`
//! finds a failing check, 2 for usage and configuration errors.
//!
//! The environment variable `PROLATE_SQUEEZE_THREADS` caps the internal
//! rayon parallelism (quadrature assembly and Monte-Carlo blocks); results
//! do not depend on the thread count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use commands::Invocation;

#[derive(Parser)]
#[command(
    name = "prolate-squeeze",
    version,
    about = "Prolate-mode squeezing analysis for a diffraction-limited imaging system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the prolate basis and export its spectrum and mode curves.
    Basis(CommonArgs),
    /// Export per-mode quadrature variances under the configured profile.
    Variances(CommonArgs),
    /// Evaluate the N-versus-S mode budget of the configured system.
    Budget(CommonArgs),
    /// Draw Monte-Carlo homodyne samples and compare them to the analytics.
    Simulate(CommonArgs),
    /// Run the library's self-check registry; exits 0 iff every check passes.
    Verify(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Basis(args)
            | Command::Variances(args)
            | Command::Budget(args)
            | Command::Simulate(args)
            | Command::Verify(args) => args,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory, overriding `output.directory` from the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Generator seed, overriding `mc.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    ExitCode::from(run(&cli))
}

fn run(cli: &Cli) -> u8 {
    if let Err(message) = configure_threads() {
        eprintln!("prolate-squeeze: {message}");
        return 2;
    }
    let args = cli.command.args();
    let invocation = match Invocation::new(&args.config, args.out.as_deref(), args.seed) {
        Ok(invocation) => invocation,
        Err(err) => {
            eprintln!("prolate-squeeze: {err}");
            return 2;
        }
    };
    let outcome = match &cli.command {
        Command::Basis(_) => commands::cmd_basis(&invocation).map(|()| 0),
        Command::Variances(_) => commands::cmd_variances(&invocation).map(|()| 0),
        Command::Budget(_) => commands::cmd_budget(&invocation).map(|()| 0),
        Command::Simulate(_) => commands::cmd_simulate(&invocation).map(|()| 0),
        Command::Verify(_) => {
            commands::cmd_verify(&invocation).map(|all_passed| if all_passed { 0 } else { 1 })
        }
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("prolate-squeeze: {err}");
            2
        }
    }
}

/// Apply the `PROLATE_SQUEEZE_THREADS` cap to the global rayon pool. Unset
/// means rayon's own default (one thread per logical CPU).
fn configure_threads() -> Result<(), String> {
    let text = match std::env::var("PROLATE_SQUEEZE_THREADS") {
        Ok(text) => text,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(err) => return Err(format!("PROLATE_SQUEEZE_THREADS: {err}")),
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            format!("PROLATE_SQUEEZE_THREADS must be a positive integer, got {text:?}")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|err| format!("PROLATE_SQUEEZE_THREADS: {err}"))
}
