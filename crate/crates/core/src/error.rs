use thiserror::Error;

use crate::model::Attribute;

/// Errors raised by the engine. Negative answers (an OD that does not hold,
/// a goal that is not implied) are results, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(Attribute),

    #[error("type mismatch on `{attr}`: cannot compare {left} with {right}")]
    TypeMismatch {
        attr: Attribute,
        left: &'static str,
        right: &'static str,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("table error: {0}")]
    Table(String),

    #[error("universe of {size} attributes exceeds the cap of {cap}; split the constraint set")]
    UniverseTooLarge { size: usize, cap: usize },

    #[error("{rule}: {reason}")]
    RuleApplication { rule: String, reason: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn rule(rule: impl ToString, reason: impl Into<String>) -> Self {
        Error::RuleApplication {
            rule: rule.to_string(),
            reason: reason.into(),
        }
    }
}
