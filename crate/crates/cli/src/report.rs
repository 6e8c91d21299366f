//! JSON reports on stdout and error objects on stderr.

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Report {
    operation: &'static str,
    parameters: Value,
    estimates: Map<String, Value>,
    checks: Map<String, Value>,
}

impl Report {
    pub fn new(operation: &'static str, parameters: &impl Serialize) -> Self {
        Report {
            operation,
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            estimates: Map::new(),
            checks: Map::new(),
        }
    }

    pub fn estimate(mut self, key: &str, value: impl Serialize) -> Self {
        self.estimates.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn check(mut self, key: &str, pass: bool, tolerance: Value) -> Self {
        self.checks.insert(key.into(), json!({ "pass": pass, "tolerance": tolerance }));
        self
    }

    pub fn print(self) -> Result<(), CliError> {
        let doc = json!({
            "operation": self.operation,
            "version": VERSION,
            "parameters": self.parameters,
            "estimates": self.estimates,
            "checks": self.checks,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::usage(e.to_string()))?;
        let mut out = std::io::stdout().lock();
        match writeln!(out, "{text}").and_then(|_| out.flush()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { code: 2, kind: "usage", message: msg.into() }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError {
            code: 3,
            kind: "io",
            message: format!("{}: {err}", path.display()),
        }
    }

    /// Malformed input file.
    pub fn input(path: &Path, err: cms_core::Error) -> Self {
        CliError {
            code: 1,
            kind: "invalid-input",
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn core(err: cms_core::Error) -> Self {
        match err {
            cms_core::Error::InvalidParameter(_) => CliError {
                code: 2,
                kind: "usage",
                message: err.to_string(),
            },
            _ => CliError {
                code: 1,
                kind: "computation",
                message: err.to_string(),
            },
        }
    }

    pub fn emit(self) -> ExitCode {
        let doc = json!({ "error": { "kind": self.kind, "message": self.message, "exit_code": self.code } });
        eprintln!("{doc}");
        ExitCode::from(self.code)
    }
}
