//! Command-line front end and benchmark harness for `clustermesh`.
//!
//! [`run`] parses arguments, dispatches to a subcommand and maps failures to
//! process exit codes (see [`CliError::exit_code`]).

pub mod args;
pub mod bench;
pub mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use clustermesh::MeshError;

pub use args::{Cli, Command};
pub use bench::{run_bench, BenchConfig, BenchReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Mesh(MeshError::ConnectivityMismatch { .. }) => EXIT_MISMATCH,
            CliError::Mesh(MeshError::InvalidParameter(_)) => EXIT_USAGE,
            CliError::Mesh(_) | CliError::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name) and runs the selected command.
/// Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
