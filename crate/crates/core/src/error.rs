use thiserror::Error;

/// Errors surfaced by every layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} needs {requested} modes, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown generator `{name}` for model `{model}`")]
    UnknownGenerator { name: String, model: String },

    #[error("generator `{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: String,
        got: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code for the command-line front end.
    ///
    /// 2 = invalid config or expression, 3 = resource limit, 4 = assertion failure,
    /// 1 = anything else (I/O, numerical breakdown).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Syntax { .. }
            | Error::UnknownGenerator { .. }
            | Error::Arity { .. }
            | Error::UnsupportedOperator(_)
            | Error::Json(_) => 2,
            Error::ResourceLimit { .. } => 3,
            Error::Assertion(_) => 4,
            Error::Io(_) | Error::Csv(_) | Error::Numerical(_) => 1,
        }
    }

    /// Short machine-readable tag used in structured error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::ResourceLimit { .. } => "resource-limit",
            Error::UnsupportedOperator(_) => "unsupported-operator",
            Error::Syntax { .. } => "syntax",
            Error::UnknownGenerator { .. } => "unknown-generator",
            Error::Arity { .. } => "arity",
            Error::Numerical(_) => "numerical",
            Error::Assertion(_) => "assertion",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_documented_table() {
        assert_eq!(Error::invalid("x").exit_code(), 2);
        let e = Error::ResourceLimit {
            what: "truncation",
            requested: 10,
            cap: 5,
        };
        assert_eq!(e.exit_code(), 3);
        assert_eq!(e.kind(), "resource-limit");
        assert_eq!(Error::Assertion("x".into()).exit_code(), 4);
    }
}
