//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 1 when a run fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, ValueEnum};

use crate::error::Error;
use crate::harness::aggregate::{replicate, VERSION};
use crate::harness::config::{read_config, PolicyConfig, RunConfig};
use crate::harness::csv::{write_csv, write_csv_to};
use crate::harness::scenario::Scenario;
use crate::policy::DEFAULT_HISTORY_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Eps,
    Ucb,
    Uniform,
}

/// Replicated contextual-bandit regret experiments.
#[derive(Debug, Parser)]
#[command(name = "linbandit", version = VERSION)]
pub struct Args {
    /// Run configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed; replication i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Horizon T.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Preset environment: fig1a, fig1b:I, scaling:d,K or twocontext:I.
    #[arg(long)]
    pub scenario: Option<Scenario>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
}

impl Args {
    /// Combines the config file, the scenario preset and the flag overrides.
    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let mut config = match (&self.config, self.scenario) {
            (Some(path), sc) => {
                let mut c = read_config(path).map_err(|e| match e {
                    Error::Io(io) => Error::config(format!("{}: {io}", path.display())),
                    e => e,
                })?;
                if let Some(sc) = sc {
                    c.environment = sc.config().environment;
                }
                c
            }
            (None, Some(sc)) => sc.config(),
            (None, None) => return Err(Error::config("one of --config or --scenario is required")),
        };
        if let Some(kind) = self.policy {
            let p = config.policy.p().unwrap_or(32 * config.environment.arms as u64);
            config.policy = match kind {
                PolicyKind::Eps => PolicyConfig::EpsGreedy { p },
                PolicyKind::Ucb => PolicyConfig::Ucb {
                    p,
                    history_cap: match config.policy {
                        PolicyConfig::Ucb { history_cap, .. } => history_cap,
                        _ => DEFAULT_HISTORY_CAP,
                    },
                },
                PolicyKind::Uniform => PolicyConfig::Uniform,
            };
        }
        let r = &mut config.run;
        r.seed = self.seed.unwrap_or(r.seed);
        r.reps = self.reps.unwrap_or(r.reps);
        r.horizon = self.horizon.unwrap_or(r.horizon);
        r.checkpoints.retain(|&c| c <= r.horizon);
        if self.out.is_some() {
            r.out = self.out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

/// Runs the CLI, writing the CSV (or a summary when `--out` is given) to `stdout`.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let config = match args.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}\n\n{}", Args::command().render_usage());
            return if e.is_config_error() { 2 } else { 1 };
        }
    };
    let trace = match replicate(&config) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if e.is_config_error() { 2 } else { 1 };
        }
    };
    let written = match &config.run.out {
        Some(path) => write_csv(&trace, path).map(|_| {
            let _ = writeln!(
                stdout,
                "wrote {} rows to {}; mean R(T) = {} (sd {})",
                trace.len(),
                path.display(),
                trace.final_mean(),
                trace.std_regret.last().copied().unwrap_or(0.0)
            );
        }),
        None => write_csv_to(&trace, &mut *stdout).map_err(Error::from),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_io(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
