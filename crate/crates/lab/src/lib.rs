//! Workspace DSL, JSON certificate reports, and the command-line driver for
//! the free-amalgamation toolkit.

pub mod commands;
pub mod dsl;
pub mod report;
