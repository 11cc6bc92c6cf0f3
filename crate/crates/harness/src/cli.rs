//! The `bootlab` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};
use crate::registry::{self, Profile};
use crate::report::{format_summary, write_outputs};
use crate::runner::run_scenario;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "BOOTSTRAP_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bootlab", version, about = "Bootstrap calibration experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario from a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the built-in scenario names.
    ListScenarios,
    /// Run a built-in scenario.
    Reproduce {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long, value_enum, default_value_t = Profile::Desk)]
        profile: Profile,
    },
    /// Quick end-to-end check: every built-in scenario at smoke scale, twice.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunOpts {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: $BOOTSTRAP_LAB_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory (default: the config's `outputs.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(t) = flag {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| HarnessError::Config(format!("{THREADS_ENV} must be a thread count, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match thread_count(threads)? {
        Some(0) => Err(HarnessError::Config("thread count must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start {t} threads: {e}")))?
            .install(f),
        None => f(),
    }
}

fn run_and_write(cfg: ScenarioConfig, opts: &RunOpts, out: &mut dyn Write) -> Result<()> {
    let cfg = cfg.with_overrides(opts.seed, opts.out.clone());
    cfg.validate()?;
    let report = with_threads(opts.threads, || run_scenario(&cfg))?;
    let (csv, json) = write_outputs(&report, &cfg.outputs.dir)?;
    let _ = write!(out, "{}", format_summary(&report));
    let _ = writeln!(out, "wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn selftest(threads: Option<usize>, out: &mut dyn Write) -> Result<()> {
    for cfg in registry::all(Profile::Smoke) {
        let a = with_threads(threads, || run_scenario(&cfg))?;
        let b = with_threads(Some(1), || run_scenario(&cfg))?;
        if a.records != b.records {
            return Err(HarnessError::Config(format!("{}: results depend on the thread count", cfg.name)));
        }
        let _ = writeln!(out, "ok  {}", cfg.name);
    }
    Ok(())
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Run { config, opts } => run_and_write(ScenarioConfig::load(&config)?, &opts, out),
        Command::ListScenarios => {
            for name in registry::SCENARIOS {
                let _ = writeln!(out, "{name}");
            }
            Ok(())
        }
        Command::Reproduce { name, opts, profile } => {
            run_and_write(registry::builtin(&name, profile)?, &opts, out)
        }
        Command::Selftest { threads } => selftest(threads, out),
    }
}

/// Parses `args` and runs the command; returns the process exit code:
/// 0 on success (including `--help`), 1 for usage or configuration errors,
/// 2 for runtime failures.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
