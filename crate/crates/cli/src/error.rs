use std::fmt;

/// Exit status 1 for problems the user can fix, 2 for everything else.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

pub fn user(msg: impl Into<String>) -> CliError {
    CliError::User(msg.into())
}

pub fn internal(msg: impl Into<String>) -> CliError {
    CliError::Internal(msg.into())
}

/// Wraps an I/O failure with the path involved.
pub fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| internal(format!("{}: {e}", path.display()))
}
