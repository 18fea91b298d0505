//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// A caller violated an operation's contract (length mismatch, bad dimension, ...).
    Contract(String),
    /// A numerical routine failed (e.g. Cholesky not PSD after max jitter).
    Numeric(String),
    /// An optimizer model produced unusable output (e.g. an empty prompt).
    Generation(String),
    /// A scripted client ran out of canned responses — a test bug signal.
    ScriptExhausted,
    /// A remote call failed after exhausting retries.
    Transport { message: String, attempts: u32 },
    /// Config validation failed; one entry per violated key.
    Config(Vec<String>),
    /// A run artifact could not be loaded (missing, corrupt, or wrong version).
    Checkpoint(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn generation(msg: impl Into<String>) -> Self {
        Error::Generation(msg.into())
    }

    pub fn checkpoint(msg: impl Into<String>) -> Self {
        Error::Checkpoint(msg.into())
    }

    /// True for config/validation errors, used by the CLI to pick exit codes.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::Generation(msg) => write!(f, "generation error: {msg}"),
            Error::ScriptExhausted => write!(f, "scripted client exhausted its responses"),
            Error::Transport { message, attempts } => {
                write!(f, "transport error after {attempts} attempt(s): {message}")
            }
            Error::Config(violations) => {
                writeln!(f, "invalid config ({} problem(s)):", violations.len())?;
                for v in violations {
                    writeln!(f, "  - {v}")?;
                }
                Ok(())
            }
            Error::Checkpoint(msg) => write!(f, "checkpoint error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
