//! Configuration, result records and subcommands of the `realrod` tool.

pub mod config;
pub mod record;
pub mod run;

pub use config::{ConfigError, Format, MethodName, Overrides, RunConfig};
pub use record::{verify, write_table, Cell, Table, TOOL_VERSION};
pub use run::{Exit, Outcome, RunError, SuppressionGrid};
