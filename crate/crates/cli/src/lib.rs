//! Command-line front end for the `ontic-nogo` scenarios.
//!
//! Exit codes: 0 success, 1 contradiction with `--fail-on-contradiction`,
//! 2 usage error, 3 numerical failure.

pub mod config;
pub mod pipeline;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;
use ontic_nogo::report::emit_json;

pub use config::{Cli, Command, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRADICTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ontic_nogo::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ontic_nogo::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(
                E::InvalidArgument(_) | E::InvalidDirection(_) | E::CapExceeded { .. } | E::UnknownLabel(_),
            ) => EXIT_USAGE,
            CliError::Core(_) | CliError::Json(_) => EXIT_NUMERICAL,
        }
    }
}

/// Parses `argv`, runs the pipeline and writes outputs. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_command(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run with --help for usage");
            }
            e.exit_code()
        }
    }
}

fn run_command(cmd: Command) -> Result<i32, CliError> {
    let (cfg, flags) = RunConfig::from_command(cmd)?;
    let seed = cfg.seed.unwrap_or_else(rand::random);
    let start = Instant::now();
    let mut exec = pipeline::execute(&cfg, seed)?;
    if flags.emit_timing {
        exec.report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let bytes = emit_json(&exec.report);
    match &cfg.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    if let Some(path) = &cfg.csv {
        std::fs::write(path, &exec.csv)?;
    }
    if exec.contradiction {
        log::info!("contradiction detected ({} certificates)", exec.report.certificates.len());
    }
    Ok(if flags.fail_on_contradiction && exec.contradiction { EXIT_CONTRADICTION } else { EXIT_OK })
}
