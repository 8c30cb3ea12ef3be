//! Configuration, scan orchestration and file formats for the `ionkin`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod histogram;
pub mod io;
pub mod scan;

pub use error::{CliError, Result};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "IONKIN_THREADS";

/// Builds the global worker pool from `IONKIN_THREADS`, if set.
pub fn init_threads() -> Result<()> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                ))
            })?,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}
