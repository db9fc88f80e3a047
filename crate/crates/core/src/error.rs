use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Line/column (1-based) of a parse error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // catalog
    #[error("empty CSV input")]
    EmptyFile,
    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column `{column}` row {row}: cannot parse `{cell}` as a number")]
    UnparseableNumeric {
        column: String,
        row: usize,
        cell: String,
    },
    #[error("no such column `{0}`")]
    NoSuchColumn(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),

    // paql
    #[error("syntax error at {position}: {message}")]
    Syntax {
        position: Position,
        message: String,
        expected: Vec<String>,
    },
    #[error("duplicate {clause} clause at {position}")]
    DuplicateClause { clause: String, position: Position },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("empty BETWEEN range: {low} > {high}")]
    EmptyBetween { low: f64, high: f64 },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    // evaluator
    #[error("AVG over an empty package")]
    AvgOfEmpty,

    // pruning
    #[error("cardinality upper bound is unbounded")]
    UnboundedUpper,

    // solver
    #[error("formula expands to more than {limit} disjuncts")]
    DnfBlowup { limit: usize },
    #[error("solver deadline reached before an answer was found")]
    Timeout,
    #[error("brute-force enumeration too large: {size} occurrence slots (limit {limit})")]
    TooLarge { size: u64, limit: u64 },

    // local search
    #[error("replacement size k={0} unsupported (k must be 1 or 2)")]
    KUnsupported(usize),

    // exploration
    #[error("query has no valid package")]
    InfeasibleQuery,
    #[error("tuple {tuple} is not in the current package with multiplicity >= {multiplicity}")]
    NotInPackage { tuple: usize, multiplicity: u32 },
    #[error("no alternative package under the current pins")]
    NoAlternative,
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyFile => "EMPTY_FILE",
            Error::RaggedRow { .. } => "RAGGED_ROW",
            Error::DuplicateColumn(_) => "DUPLICATE_COLUMN",
            Error::UnparseableNumeric { .. } => "UNPARSEABLE_NUMERIC",
            Error::NoSuchColumn(_) => "NO_SUCH_COLUMN",
            Error::NotNumeric(_) => "NOT_NUMERIC",
            Error::Syntax { .. } => "SYNTAX_ERROR",
            Error::DuplicateClause { .. } => "DUPLICATE_CLAUSE",
            Error::TypeMismatch(_) => "TYPE_MISMATCH",
            Error::EmptyBetween { .. } => "EMPTY_BETWEEN",
            Error::UnsupportedFeature(_) => "UNSUPPORTED_FEATURE",
            Error::AvgOfEmpty => "AVG_OF_EMPTY",
            Error::UnboundedUpper => "UNBOUNDED_UPPER",
            Error::DnfBlowup { .. } => "DNF_BLOWUP",
            Error::Timeout => "TIMEOUT",
            Error::TooLarge { .. } => "TOO_LARGE",
            Error::KUnsupported(_) => "K_UNSUPPORTED",
            Error::InfeasibleQuery => "INFEASIBLE_QUERY",
            Error::NotInPackage { .. } => "NOT_IN_PACKAGE",
            Error::NoAlternative => "NO_ALTERNATIVE",
        }
    }

    /// Source position, for parse errors.
    pub fn position(&self) -> Option<Position> {
        match self {
            Error::Syntax { position, .. } | Error::DuplicateClause { position, .. } => {
                Some(*position)
            }
            _ => None,
        }
    }

    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::DuplicateClause { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
