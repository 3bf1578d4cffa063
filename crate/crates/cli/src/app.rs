//! Argument parsing and the exit-code contract: 0 success, 1 usage error,
//! 2 mathematical breakdown, 3 failed property check.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Context};
use crate::config::load_config;
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "chflow",
    version,
    about = "Lagrangian Camassa-Holm solver, operator and group checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for the randomized property suites.
    #[arg(long, global = true, value_name = "INT", default_value_t = 0)]
    pub seed: u64,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate the flow and write states, diagnostics and a summary.
    Run,
    /// Self-convergence study over converge.levels.
    Converge,
    /// Randomized operator bound suite and Gateaux gradient check.
    CheckOperators,
    /// Randomized group-axiom and stability suite.
    CheckGroup,
    /// Compare against the Eulerian reference solver.
    OracleCompare,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut out = cli.out.clone();
    let result = execute(&cli, &mut out);
    match result {
        Ok(report) => {
            if !cli.quiet {
                print!("{}", report.render());
            }
            EXIT_OK
        }
        Err(err) => {
            if let Some(dir) = &out {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = commands::write_failure(dir, &err);
                }
            }
            eprint!("{}", err.report().render());
            err.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut Option<PathBuf>) -> Result<chflow_core::io::KeyValueReport, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let cfg = load_config(path)?;
    let dir = out.get_or_insert_with(|| cfg.resolve(&cfg.output.directory)).clone();
    commands::ensure_dir(&dir)?;
    let ctx = Context {
        cfg,
        out: dir,
        seed: cli.seed,
    };
    match cli.command {
        Command::Run => commands::cmd_run(&ctx),
        Command::Converge => commands::cmd_converge(&ctx),
        Command::CheckOperators => commands::cmd_check_operators(&ctx),
        Command::CheckGroup => commands::cmd_check_group(&ctx),
        Command::OracleCompare => commands::cmd_oracle_compare(&ctx),
    }
}
