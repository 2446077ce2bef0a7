//! Host-side companion to `weakmeas-core`.
//!
//! Adds a thread-pool [`Pool`] runner, CSV and record-dump formats, the
//! key=value run configuration, and the subcommands behind the `weakmeas`
//! binary. Every subcommand returns a [`Table`] whose header carries the fully
//! resolved configuration, so a CSV file is enough to rerun it.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod pool;
pub mod records;

pub use commands::run;
pub use config::RunConfig;
pub use csv::{fmt_real, Cell, Table};
pub use error::CliError;
pub use pool::Pool;
