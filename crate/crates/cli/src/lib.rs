//! File ingestion, report assembly and rendering for the `perfpriv` binary.

pub mod commands;
pub mod error;
pub mod grid;
pub mod input;
pub mod report;

pub use commands::{run, Command, Settings};
pub use error::CliError;
pub use input::{load, parse, Format, InputDocument, Table};

/// Environment variables that override the optimizer seed, in priority order.
pub const SEED_VARS: [&str; 2] = ["PERFPRIV_SEED", "TOOL_SEED"];

/// Seed from the environment, accepting decimal or `0x`-prefixed hex.
pub fn seed_from_env(
    get: impl Fn(&str) -> Option<String>,
) -> Result<Option<(u64, &'static str)>, CliError> {
    for var in SEED_VARS {
        let Some(raw) = get(var) else { continue };
        let t = raw.trim();
        let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => t.parse(),
        };
        return parsed.map(|s| Some((s, var))).map_err(|_| {
            CliError::Invalid(format!("{var}={raw} is not an unsigned integer seed"))
        });
    }
    Ok(None)
}
