//! Library side of the `cosctl` CLI: config parsing, job execution and CSV
//! output, kept out of `main` so integration tests can drive them directly.

pub mod config;
pub mod csvout;
pub mod jobs;
