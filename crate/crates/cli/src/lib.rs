//! The `fou` command-line tool: parse, validate, compute, emit.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use crate::args::RunConfig;
use crate::error::CliError;

/// Reads a `FOU_THREADS` value.
pub fn parse_threads(raw: &str) -> Result<usize, CliError> {
    raw.trim()
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
        .ok_or_else(|| CliError::Usage(format!("FOU_THREADS must be a positive integer, got {raw:?}")))
}

/// Sizes the global worker pool; `None` keeps the default of one worker per core.
pub fn init_threads(raw: Option<&str>) -> Result<(), CliError> {
    let Some(raw) = raw else {
        return Ok(());
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(parse_threads(raw)?)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let table = commands::execute(cfg)?;
    output::emit_report(&table, cfg.format, cfg.output_path.as_deref())
}
