use std::fmt;

use partdiss_core::Error as CoreError;

/// Process exit codes. Everything wrong with the inputs is `Config`; a FAIL verdict from
/// a validator is `Validation`; a diverging trajectory is `BlowUp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Config,
    Validation,
    BlowUp,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Config => 1,
            ExitClass::Validation => 2,
            ExitClass::BlowUp => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitClass::Config => "config",
            ExitClass::Validation => "validation",
            ExitClass::BlowUp => "blow-up",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError { class: ExitClass::Config, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> CliError {
        CliError { class: ExitClass::Validation, message: message.into() }
    }

    /// One line on stderr, machine-parsable.
    pub fn stderr_record(&self) -> String {
        serde_json::json!({
            "error": self.class.label(),
            "exit": self.class.code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.class.label(), self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> CliError {
        let class = match e {
            CoreError::BlowUp { .. } => ExitClass::BlowUp,
            _ => ExitClass::Config,
        };
        CliError { class, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
