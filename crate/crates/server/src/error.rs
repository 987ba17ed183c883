//! Structured error bodies: `{code, message, detail}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::Serialize;
use serde_json::{json, Value};

use tempo_core::error::{ClusterError, IngestError, LayoutError, RenderError, SelectionError, SimError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                detail: Value::Null,
            },
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = detail;
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} '{id}'"))
            .with_detail(json!({ "kind": what, "id": id }))
    }

    pub fn bad_json(err: serde_json::Error) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_json", err.to_string())
            .with_detail(json!({ "line": err.line(), "column": err.column() }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, axum::Json(self.body)).into_response()
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let detail = match &e {
            IngestError::Cell { row, column, message } => {
                json!({ "row": row, "column": column, "reason": message })
            }
            IngestError::DuplicateCell { run_id, observable, t } => {
                json!({ "run_id": run_id, "observable": observable, "t": t })
            }
            IngestError::Data(tempo_core::DataError::Invalid(violations)) => json!(violations),
            _ => Value::Null,
        };
        Self::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()).with_detail(detail)
    }
}

impl From<ClusterError> for ApiError {
    fn from(e: ClusterError) -> Self {
        let (status, code) = match &e {
            ClusterError::TooManyClusters { .. } => (StatusCode::CONFLICT, "too_many_clusters"),
            ClusterError::UnknownRun(_) | ClusterError::UnknownCluster(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "unknown_reference")
            }
            _ => (StatusCode::BAD_REQUEST, "invalid_cluster_request"),
        };
        let detail = match &e {
            ClusterError::TooManyClusters { k, n } => json!({ "k": k, "runs": n }),
            _ => Value::Null,
        };
        Self::new(status, code, e.to_string()).with_detail(detail)
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        let code = match &e {
            LayoutError::Mismatch(_) => "model_mismatch",
            _ => "invalid_layout",
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }
}

impl From<SelectionError> for ApiError {
    fn from(e: SelectionError) -> Self {
        match &e {
            SelectionError::StaleCluster { axis, cluster } => {
                Self::new(StatusCode::CONFLICT, "stale_cluster", e.to_string())
                    .with_detail(json!({ "axis": axis, "cluster": cluster }))
            }
            _ => Self::new(StatusCode::BAD_REQUEST, "invalid_selection", e.to_string()),
        }
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_render_config", e.to_string())
    }
}

impl From<SimError> for ApiError {
    fn from(e: SimError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_grid", e.to_string())
    }
}
