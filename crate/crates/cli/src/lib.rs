//! Command-line front end: `stats`, `generate`, `sweep` and `analyze`.
//!
//! Exit codes: 0 success, 1 usage, 2 data or validation, 3 internal.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod fuzzing;
pub mod manifest;

use std::ffi::OsString;
use std::fs;

use clap::Parser;

use args::{Cli, Command};
use config::{parse_config, RunConfig};
use error::{CliError, CliResult};
use manifest::{FileDigest, Manifest, MANIFEST_FILE};

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cmd: &Command) -> CliResult<RunConfig> {
    let file = match &cmd.common().config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    Ok(file.overlay(cmd.overlay()))
}

pub fn run(cmd: &Command) -> CliResult<()> {
    let mut cfg = load_config(cmd)?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool may already exist when called twice in one process
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool: {e}");
        }
    }
    let produced = match cmd {
        Command::Stats(_) => commands::stats(&mut cfg)?,
        Command::Generate(_) => commands::generate(&mut cfg)?,
        Command::Sweep(_) => commands::sweep_cmd(&mut cfg)?,
        Command::Analyze(_) => commands::analyze(&mut cfg)?,
    };
    print!("{}", produced.stdout);
    let Some(out) = cfg.out.clone() else {
        return Ok(());
    };
    let outputs = produced.files.iter().map(|(name, bytes)| FileDigest::of(name.clone(), bytes)).collect();
    let manifest = Manifest::new(cmd.name(), cfg, produced.inputs, outputs);
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    let mut files = produced.files;
    files.push((MANIFEST_FILE.to_string(), bytes));
    commands::commit(&out, &files)
}
