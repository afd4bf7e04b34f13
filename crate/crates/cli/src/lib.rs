//! Command-line front end: argument parsing, subcommands and the JSON/CSV
//! report formats.

pub mod args;
pub mod bundle;
pub mod commands;
pub mod error;

pub use args::Cli;
pub use bundle::ReportBundle;
pub use commands::run;
pub use error::CliError;
