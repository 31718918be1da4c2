use std::fmt;

/// CLI failure classes; each maps to a stable process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparseable, or semantically invalid configuration
    /// (including bad command-line values and missing input files).
    Config(String),
    /// A verification suite ran to completion and some check failed.
    Verification(String),
    /// A run failed at runtime: non-finite loss, I/O trouble, worker panic.
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        CliError::Runtime(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
