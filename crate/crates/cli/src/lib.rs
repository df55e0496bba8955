//! Command-line front end: argument parsing, run persistence, and replay.
//!
//! Every study command writes a self-describing run directory whose
//! `config.json` can be re-executed later; `results.json` is byte-stable
//! so replays can compare digests instead of parsing floats.

pub mod args;
pub mod config;
pub mod record;
pub mod run;

use std::ffi::OsString;
use std::fmt;

use clap::error::ErrorKind;
use clap::Parser;

/// Failure modes with distinct exit codes, so scripts can tell a malformed
/// invocation (64) from an oracle budget overflow (65), a verify request on
/// a non-admissible instance (66), and everything else (1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Budget(String),
    NotAdmissible(String),
    Runtime(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Budget(_) => 65,
            CliError::NotAdmissible(_) => 66,
            CliError::Runtime(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg)
            | CliError::Budget(msg)
            | CliError::NotAdmissible(msg)
            | CliError::Runtime(msg) => f.write_str(msg),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Prints one line to stdout. A closed pipe (e.g. the reader was `head`)
/// ends the process quietly instead of panicking; other write failures
/// report and exit 1.
pub(crate) fn emit(text: &str) {
    use std::io::{ErrorKind, Write};
    if let Err(e) = writeln!(std::io::stdout(), "{text}") {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        let _ = writeln!(std::io::stderr(), "error: {e}");
        std::process::exit(1);
    }
}

/// Writes raw bytes to stdout with the same closed-pipe behavior as
/// [`emit`].
pub(crate) fn emit_bytes(bytes: &[u8]) -> Result<(), CliError> {
    use std::io::{ErrorKind, Write};
    match std::io::stdout().write_all(bytes) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(CliError::Io(e)),
    }
}

/// Parse `argv` and run the selected command, returning the process exit
/// code. Help and version requests print and exit 0; parse failures print
/// clap's diagnostic and exit 64.
pub fn run_cli<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    match args::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            use std::io::Write;
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}
