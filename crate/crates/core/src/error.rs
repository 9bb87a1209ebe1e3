use std::fmt;

use thiserror::Error;

/// A physical parameter that breaks one of its invariants.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {field}: {reason}")]
pub struct ValidationError {
    pub field: &'static str,
    pub reason: String,
}

impl ValidationError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self { field, reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntanglementError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("d(t) is still positive at the end of the scan (t = {t_max:e} s)")]
    ScanTooShort { t_max: f64 },
    #[error("scan step {step:e} s does not resolve the Rabi period {period:e} s with 50 samples")]
    ScanTooCoarse { step: f64, period: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid violation: {0}")]
    GridViolation(String),
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// Which quantity a tolerance check was applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Oracle,
    Invariant,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckKind::Oracle => f.write_str("oracle"),
            CheckKind::Invariant => f.write_str("invariant"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config error {}, key `{key}`: {reason}", location(*.line))]
    /// `line` is 1-based; 0 marks a command-line flag or a whole-config rule.
    Config { key: String, line: usize, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{kind} check failed: {detail}")]
    Tolerance { kind: CheckKind, detail: String },
}

fn location(line: usize) -> String {
    if line == 0 {
        "on the command line".to_owned()
    } else {
        format!("at line {line}")
    }
}

impl ScenarioError {
    pub fn config(key: impl Into<String>, line: usize, reason: impl Into<String>) -> Self {
        Self::Config { key: key.into(), line, reason: reason.into() }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config { .. } => 1,
            ScenarioError::Io { .. } => 2,
            ScenarioError::Tolerance { .. } => 3,
        }
    }
}
