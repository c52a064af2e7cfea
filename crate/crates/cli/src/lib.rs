//! Command-line front end: instance files, reports and the self-test.

pub mod commands;
pub mod instance;
pub mod report;
pub mod selftest;

pub use commands::{cmd_construct, cmd_decide, Outcome, RunOptions};
pub use report::RunReport;
