use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use paql_core::error::Position;
use paql_core::solver::SolveStats;
use paql_core::Error;
use serde::Serialize;

/// JSON error body: `{code, message, position?, stats?}`.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<String>>,
    /// Partial solver statistics on timeout.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<SolveStats>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            position: None,
            expected: None,
            stats: None,
        }
    }

    pub fn no_such_dataset(name: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "NO_SUCH_DATASET",
            format!("no dataset named `{name}`"),
        )
    }

    pub fn no_such_session(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "NO_SUCH_SESSION",
            format!("no session `{id}`"),
        )
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "MALFORMED_BODY", message)
    }

    pub fn timeout(stats: SolveStats) -> Self {
        let mut e = Self::from(Error::Timeout);
        e.stats = Some(stats);
        e
    }
}

fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::EmptyFile
        | Error::RaggedRow { .. }
        | Error::DuplicateColumn(_)
        | Error::UnparseableNumeric { .. }
        | Error::Syntax { .. }
        | Error::DuplicateClause { .. } => StatusCode::BAD_REQUEST,
        Error::NotInPackage { .. } | Error::NoAlternative => StatusCode::CONFLICT,
        Error::Timeout => StatusCode::SERVICE_UNAVAILABLE,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        ApiError {
            status: status_for(&err),
            code: err.code().to_string(),
            message: err.to_string(),
            position: err.position(),
            expected: match &err {
                Error::Syntax { expected, .. } if !expected.is_empty() => Some(expected.clone()),
                _ => None,
            },
            stats: None,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}
