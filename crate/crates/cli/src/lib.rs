//! Command-line front end for the `splitvi` solver: problem loading,
//! configuration files, trace CSV and run summaries.

pub mod commands;
pub mod config_file;
pub mod error;
pub mod trace;

pub use commands::{
    cmd_generate, cmd_run, cmd_verify, run_suite, suite_status, ExitStatus, ProblemFile, ProblemRef, RunManifest,
    RunReport, RunSummary, VerifyReport, OUT_DIR_ENV,
};
pub use error::CliError;
