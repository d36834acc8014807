//! Configuration, records and subcommands of the `specdist` tool.

pub mod commands;
pub mod config;
pub mod records;
