use thiserror::Error;

use crate::syntax::Var;

/// Errors raised while loading a program or a query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: nonlinear term: {detail}")]
    Nonlinear {
        line: usize,
        column: usize,
        detail: String,
    },
    #[error("{line}:{column}: predicate {pred} used with arity {found}, previously {expected}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
        line: usize,
        column: usize,
    },
    #[error("clause {clause} (line {line}) has an unsatisfiable constraint: {text}")]
    Unsatisfiable {
        clause: usize,
        line: usize,
        text: String,
    },
    #[error("malformed clause: {0}")]
    Malformed(String),
    #[error(transparent)]
    Solver(#[from] LinError),
}

/// Errors from the linear arithmetic engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("unbound variable {0}")]
    UnboundVariable(Var),
    #[error("cannot evaluate a quantified formula under a valuation")]
    Quantified,
    #[error("disjunctive normal form exceeded {limit} conjunctions")]
    DnfLimit { limit: usize },
}

impl LinError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, LinError::DnfLimit { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("query predicate {found} does not match clause head {expected}")]
    PredicateMismatch { expected: String, found: String },
    #[error(transparent)]
    Solver(#[from] LinError),
}
