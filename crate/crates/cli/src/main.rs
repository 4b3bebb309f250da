//! `pvqa`: generate, verify and evaluate pseudo-video QA datasets.
//!
//! Exit codes: 0 success, 1 validation or oracle failure, 2 usage error,
//! 3 I/O or endpoint failure.

mod args;
mod commands;
mod settings;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use pvqa_core::{CorpusError, ManifestError};

/// Bad flags, config values or missing required inputs.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub const EXIT_INVALID: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if let Some(ManifestError::Invalid { .. }) = cause.downcast_ref() {
            return EXIT_INVALID;
        }
        if let Some(CorpusError::Capacity { .. }) = cause.downcast_ref() {
            return EXIT_INVALID;
        }
    }
    EXIT_IO
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
