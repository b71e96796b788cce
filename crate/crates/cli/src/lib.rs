//! Scenario runner behind the `geofreq` command: loads TOML scenarios or
//! builtins, integrates and analyses them, and writes a time-series CSV and
//! a text summary.

pub mod builtins;
pub mod error;
pub mod matrix;
pub mod output;
pub mod run;
pub mod scenario;

pub use error::{CliError, Result};
pub use run::{execute, run, Execution, RunOptions, RunOutcome};
pub use scenario::Scenario;
