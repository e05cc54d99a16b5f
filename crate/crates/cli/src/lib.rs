//! Command-line front end for `platoon-core`.
//!
//! [`run`] parses an argument list, executes one subcommand and returns the
//! process exit status: 0 on success, 1 on a usage, configuration or domain
//! error, 2 when a size limit admits no structure, 3 when `verify` finds a
//! mismatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;
pub mod config;
mod output;

pub use config::{CommonArgs, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] platoon_core::Error),
    #[error("{0}")]
    Io(String),
    /// Infeasible size limits met inside a sweep without `--allow-infeasible-skip`.
    #[error("infeasible: {0}")]
    InfeasibleRows(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(platoon_core::Error::Infeasible(_)) | CliError::InfeasibleRows(_) => 2,
            CliError::Verify(_) => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "platoon", version, about = "Platoon formation and payoff allocation for mixed-energy truck fleets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal platoon counts and one optimal structure.
    Form(CommonArgs),
    /// Type-based least-core allocation.
    LeastCore {
        #[command(flatten)]
        common: CommonArgs,
        /// Total benefit to share; defaults to the optimal structure's value.
        #[arg(long = "v-total")]
        v_total: Option<String>,
    },
    /// Baseline sharing schemes under the optimal structure.
    Baselines(CommonArgs),
    /// Stability of a payoff vector read from a JSON file.
    Stability {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file holding `{"payoffs": [...]}` or a bare array, one entry per truck.
        #[arg(long, value_name = "PATH")]
        payoffs: PathBuf,
        #[arg(long = "v-total")]
        v_total: Option<String>,
    },
    /// Benefit histogram over all structures, with per-class stability.
    Enumerate(CommonArgs),
    /// Least core and baselines for every size limit.
    Sweep(CommonArgs),
    /// Cross-check fast paths against exhaustive enumeration.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Random payoff vectors per size limit.
        #[arg(long, default_value_t = 25)]
        random: usize,
        #[arg(long, default_value_t = 0x9e37_79b9)]
        seed: u64,
    },
    /// One row per size limit: stability index, radius, value, payoffs.
    ReportTable1(CommonArgs),
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("error");
            let _ = writeln!(err, "{line}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Form(c) => commands::form(&RunConfig::resolve(&c)?, out),
        Command::LeastCore { common, v_total } => commands::least_core(&RunConfig::resolve(&common)?, v_total.as_deref(), out),
        Command::Baselines(c) => commands::baselines(&RunConfig::resolve(&c)?, out),
        Command::Stability {
            common,
            payoffs,
            v_total,
        } => commands::stability(&RunConfig::resolve(&common)?, &payoffs, v_total.as_deref(), out),
        Command::Enumerate(c) => commands::enumerate(&RunConfig::resolve(&c)?, out),
        Command::Sweep(c) => commands::sweep(&RunConfig::resolve(&c)?, out),
        Command::Verify { common, random, seed } => commands::verify(&RunConfig::resolve(&common)?, random, seed, out),
        Command::ReportTable1(c) => commands::report_table1(&RunConfig::resolve(&c)?, out),
    }
}
