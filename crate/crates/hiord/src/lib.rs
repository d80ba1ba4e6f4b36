//! File formats, reports, sweeps and demo rendering for the `hiord`
//! command-line tool.

pub mod demo;
mod error;
pub mod problem_file;
pub mod report;
pub mod sweep;

pub use error::{HarnessError, Result};

/// Environment variable overriding the seed of the multi-start model
/// minimizations.
pub const SEED_VAR: &str = "HIORD_SEED";

/// Seed from `HIORD_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| HarnessError::input(format!("{SEED_VAR} must be an unsigned integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(HarnessError::input(format!("{SEED_VAR}: {e}"))),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::input(format!("not a number: {s:?}")))
        })
        .collect()
}
