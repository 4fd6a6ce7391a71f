//! Error types shared by the whole engine.

use std::fmt;

use thiserror::Error;

/// A single validation complaint, tied to a rule id and, when available, the
/// source line of the offending declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub rule: &'static str,
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "[{}] line {}: {}", self.rule, line, self.msg),
            None => write!(f, "[{}] {}", self.rule, self.msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col} [{rule}]: {msg}")]
    Parse {
        line: usize,
        col: usize,
        rule: &'static str,
        msg: String,
    },

    #[error("site validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("not composable: {0}")]
    NotComposable(String),

    /// The universe boundary: the requested composite/square/pullback is
    /// well-typed but absent from the declared tables. The message names
    /// exactly what to add.
    #[error("missing declaration: {0}")]
    MissingDeclaration(String),

    #[error("not proper: {0}")]
    NotProper(String),

    #[error("not smooth: {0}")]
    NotSmooth(String),

    #[error("composite to the base is not smooth: {0}")]
    NotSmoothComposite(String),

    #[error("theory arrow mismatch: {0}")]
    ArrowMismatch(String),

    #[error("series bound too small: {0}")]
    BoundTooSmall(String),

    #[error("universe overflow: {0}")]
    UniverseOverflow(String),

    #[error("resource limit exceeded: {0}")]
    ResourceExceeded(String),

    /// Misuse of an operation (wrong bundle base, stage mismatch, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn validation(issues: Vec<Issue>) -> Error {
        Error::Validation(ValidationReport { issues })
    }
}
