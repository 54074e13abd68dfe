//! Error type shared by every module.

use thiserror::Error;

use crate::wrangle::Transform;

/// Coarse error classes, used for CLI exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Validation,
    Infeasible,
    NotFound,
    Busy,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid sketch: {0}")]
    InvalidSketch(String),
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("task role error: {0}")]
    TaskRole(String),
    #[error("contradiction: {0}")]
    Contradiction(String),
    #[error("inconsistent examples: {0}")]
    Inconsistent(String),
    #[error("no sketch-satisfying program found; best partial program {} has {violations} violation(s)", render_program(.best))]
    Exhausted {
        best: Vec<Transform>,
        violations: usize,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("empty selection: {0}")]
    EmptySelection(String),
    #[error("stale reference: {0}")]
    StaleReference(String),
    #[error("untrainable target: {0}")]
    UntrainableTarget(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no prediction: {0}")]
    NoPrediction(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("busy: {0}")]
    Busy(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn render_program(p: &[Transform]) -> String {
    let parts: Vec<String> = p.iter().map(|t| t.to_string()).collect();
    format!("[{}]", parts.join("; "))
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn category(&self) -> Category {
        match self.root() {
            Error::Exhausted { .. }
            | Error::Infeasible(_)
            | Error::Cycle(_)
            | Error::NoPrediction(_)
            | Error::InsufficientData(_) => Category::Infeasible,
            Error::NotFound(_) => Category::NotFound,
            Error::Busy(_) => Category::Busy,
            Error::Io(_) => Category::Io,
            _ => Category::Validation,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self.root() {
            Error::Structural(_) => "structural",
            Error::Conflict(_) => "conflict",
            Error::InvalidSketch(_) => "invalid_sketch",
            Error::InvalidArgs(_) => "invalid_arguments",
            Error::Schema(_) => "schema",
            Error::Config(_) => "configuration",
            Error::TaskRole(_) => "task_role",
            Error::Contradiction(_) => "contradiction",
            Error::Inconsistent(_) => "inconsistent",
            Error::Exhausted { .. } => "exhausted",
            Error::Infeasible(_) => "infeasible",
            Error::EmptySelection(_) => "empty_selection",
            Error::StaleReference(_) => "stale_reference",
            Error::UntrainableTarget(_) => "untrainable_target",
            Error::InsufficientData(_) => "insufficient_data",
            Error::NoPrediction(_) => "no_prediction",
            Error::Cycle(_) => "cycle",
            Error::Index(_) => "index",
            Error::NotFound(_) => "not_found",
            Error::Busy(_) => "busy",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Context { .. } => unreachable!(),
        }
    }

    /// Structured extras for API error bodies.
    pub fn details(&self) -> serde_json::Value {
        match self.root() {
            Error::Exhausted { best, violations } => serde_json::json!({
                "best_program": best,
                "violations": violations,
            }),
            Error::Cycle(c) => serde_json::json!({ "cycle": c }),
            _ => serde_json::Value::Null,
        }
    }
}
