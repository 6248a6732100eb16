use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use reasonlab_cli::{demos, run_file, run_scenario, seed_from_env, CliError, Report, RunOptions};

#[derive(Parser)]
#[command(name = "reasonlab", version, about = "Run reasoning-system diagnostics from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// List the bundled demo scenarios.
    Demos,
    /// Run a bundled demo scenario.
    Demo {
        name: String,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(clap::Args)]
struct Output {
    /// Write the JSON report here; otherwise it goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp so reports are byte-identical across runs.
    #[arg(long)]
    no_timestamp: bool,
}

fn emit(report: &Report, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", report.render());
        }
        None => {
            eprint!("{}", report.render());
            print!("{}", report.to_json());
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    let (report, out) = match cli.command {
        Command::Demos => {
            print!("{}", demos::table());
            return Ok(0);
        }
        Command::Run { scenario, output } => {
            let opts = RunOptions {
                no_timestamp: output.no_timestamp,
                seed_override: seed_from_env()?,
            };
            (run_file(&scenario, opts)?, output.out)
        }
        Command::Demo { name, output } => {
            let demo = demos::find(&name).ok_or_else(|| {
                CliError::Config(format!("no demo named `{name}`; see `reasonlab demos`"))
            })?;
            let opts = RunOptions {
                no_timestamp: output.no_timestamp,
                seed_override: seed_from_env()?,
            };
            (run_scenario(&demo.scenario()?, opts)?, output.out)
        }
    };
    emit(&report, out.as_deref())?;
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(CliError::EXIT_CODE as u8)
        }
    }
}
