use serde::Serialize;
use tulik_core::Error;

/// Process exit codes.
pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const NUMERIC: u8 = 4;

/// A failure reported as one JSON line on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: &'static str,
    pub message: String,
    pub exit_code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { error: "usage", message: message.into(), exit_code: USAGE }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { error: "data", message: message.into(), exit_code: DATA }
    }

    /// Prefixes the message with what was being done, e.g. the file involved.
    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.error))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (error, exit_code) = match &e {
            Error::InvalidArgument(_) | Error::Io(_) => ("usage", USAGE),
            Error::Format(_) | Error::Domain(_) | Error::UndefinedMetric(_) => ("data", DATA),
            Error::Infeasible { .. }
            | Error::Numeric(_)
            | Error::NoRoot(_)
            | Error::Unbounded(_)
            | Error::Generation { .. } => ("numeric", NUMERIC),
        };
        Self { error, message: e.to_string(), exit_code }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
