//! Result emission: 17-significant-digit CSV fields, versioned JSON
//! documents, atomic file replacement, and machine-readable failure
//! reports on stderr.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::config::{Violation, SCHEMA_VERSION};

/// The job ran and its scientific verdict is positive.
pub const EXIT_SUCCESS: i32 = 0;
/// The job ran but its verdict is a failure (violated certificate, failed
/// identity check).
pub const EXIT_VERDICT: i32 = 1;
/// The job never produced a result: bad input, unmet precondition, broken
/// I/O, or a numerical method that failed to converge.
pub const EXIT_INPUT: i32 = 2;

/// Render a float with 17 significant digits, '.' decimal separator, no
/// grouping — enough to round-trip every finite `f64` through decimal.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `content` so that `path` is either untouched or fully replaced:
/// the bytes go to a temporary file in the destination directory, which is
/// then renamed over the target.
pub fn atomic_write(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new().prefix(".hrlab-out-").tempfile_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Deliver a result document to `--output` when given, stdout otherwise.
pub fn deliver(target: Option<&Path>, content: &str) -> std::io::Result<()> {
    match target {
        Some(path) => atomic_write(path, content),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
    }
}

/// Why a run produced no result; printed to stderr as one JSON object so
/// scripts can dispatch on `error.kind` without scraping text.
#[derive(Debug)]
pub enum FailureReport {
    /// The job file or flags fail structural validation.
    Schema(Vec<Violation>),
    /// Inputs are well-formed but violate a module precondition.
    Input(String),
    /// A numerical method gave up (non-convergence, subdivision limit).
    Numerical(String),
    /// Reading inputs or writing outputs failed.
    Io(String),
}

impl FailureReport {
    pub fn from_core(err: hrlab_core::Error) -> Self {
        if err.is_input_error() {
            FailureReport::Input(err.to_string())
        } else {
            FailureReport::Numerical(err.to_string())
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let error = match self {
            FailureReport::Schema(violations) => json!({
                "kind": "schema",
                "violations": violations
                    .iter()
                    .map(|v| json!({"path": v.path, "message": v.message}))
                    .collect::<Vec<_>>(),
            }),
            FailureReport::Input(message) => json!({"kind": "input", "message": message}),
            FailureReport::Numerical(message) => json!({"kind": "numerical", "message": message}),
            FailureReport::Io(message) => json!({"kind": "io", "message": message}),
        };
        json!({"schema_version": SCHEMA_VERSION, "error": error})
    }

    /// Print the report to stderr and return the process exit code.
    pub fn emit(&self) -> i32 {
        eprintln!("{}", self.to_json());
        EXIT_INPUT
    }
}
