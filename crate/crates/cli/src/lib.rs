//! Command-line surface for the decomposition-optimality toolkit: JSON file
//! formats, a thread-capped multistart driver, and the five subcommands.
//!
//! Everything here is plumbing around `entwine-core`. The numerics live
//! there; this crate reads files, fans searches out over worker threads with
//! a merge that does not depend on the worker count, and writes certificates
//! and ensembles back out.

pub mod commands;
pub mod driver;
pub mod formats;

/// Errors surfaced to the shell, split by exit code.
///
/// `Input` covers everything the caller can fix: unreadable paths, malformed
/// JSON, files that fail validation, certificates that do not authorize the
/// requested operation. `Internal` covers faults past validation, such as an
/// exhausted search budget or an output path that cannot be written.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    /// Exit code for the process: 2 for input errors, 1 for internal faults.
    /// Codes 0 and 3 are reserved for clean verdicts.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    /// Wraps a core error from the input-loading stage, where every failure
    /// is the caller's to fix.
    pub fn input(e: entwine_core::Error) -> Self {
        CliError::Input(e.to_string())
    }

    /// Wraps a core error from the computation stage. Precondition misses
    /// still map to `Input` (a certificate that does not authorize improve);
    /// anything else is an internal fault.
    pub fn compute(e: entwine_core::Error) -> Self {
        match e {
            entwine_core::Error::Validation(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}
