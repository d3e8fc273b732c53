//! Implementation of the `debias` command-line tool; the binary in
//! `main.rs` is a thin wrapper so integration tests can reach the argument
//! parser and the canonical JSON writer.

pub mod args;
pub mod csvio;
pub mod jsonio;
pub mod run;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    MissingFile(String),
    Malformed(String),
    Io(String),
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
            CliError::MissingFile(_) => 3,
            CliError::Malformed(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::MissingFile(m)
            | CliError::Malformed(m)
            | CliError::Io(m)
            | CliError::Compute(m) => f.write_str(m),
        }
    }
}
