//! The platform's external surface: a JSON-over-HTTP service plus the wire
//! error model shared with the command-line client.
//!
//! Every endpoint is a thin adapter over a [`crate::platform::Platform`]
//! operation; for identical inputs the response body is the library
//! result's canonical JSON. Machine codes are stable across versions, and
//! authorization failures never reveal whether an unauthorized object
//! exists.

mod server;

pub use server::{serve, AppState, ServerConfig, TokenEntry};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::apps::AppError;
use crate::briql::BriqlError;
use crate::directory::DirectoryError;
use crate::graph::GraphError;
use crate::ingest::IngestError;
use crate::mv::MvError;
use crate::platform::PlatformError;
use crate::timeseries::TimeseriesError;

/// Wire error: HTTP status, stable machine code, human message, optional
/// structured detail (offending model ids, JSON path, line number).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(status: u16, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn unauthenticated() -> Self {
        ApiError::new(401, "unauthenticated", "missing or invalid bearer token")
    }

    pub fn not_found() -> Self {
        ApiError::new(404, "not_found", "no such resource")
    }
}

impl From<&PlatformError> for ApiError {
    fn from(err: &PlatformError) -> Self {
        match err {
            PlatformError::Denied => ApiError::new(403, "auth_denied", "access denied"),
            PlatformError::ModelsDenied(models) => {
                ApiError::new(403, "auth_denied", "access denied for requested models")
                    .with_detail(serde_json::json!({ "models": models }))
            }
            PlatformError::StreamAccessDenied(streams) => {
                ApiError::new(403, "auth_denied", "bound streams are not readable")
                    .with_detail(serde_json::json!({ "streams": streams }))
            }
            PlatformError::NotFound(what) => {
                ApiError::new(404, "not_found", format!("`{what}` not found"))
            }
            PlatformError::NoPublishedModel(target) => ApiError::new(
                409,
                "no_published_model",
                format!("target `{target}` has no published model"),
            ),
            PlatformError::Directory(e) => directory_error(e),
            PlatformError::Graph(e) => graph_error(e),
            PlatformError::Briql(e) => briql_error(e),
            PlatformError::Timeseries(e) => timeseries_error(e),
            PlatformError::Ingest(e) => ingest_error(e),
            PlatformError::App(e) => app_error(e),
            PlatformError::Mv(e) => mv_error(e),
            PlatformError::Io(e) => ApiError::new(500, "internal", e.clone()),
        }
    }
}

fn directory_error(err: &DirectoryError) -> ApiError {
    match err {
        // Unknown and forbidden are indistinguishable on purpose.
        DirectoryError::Denied => ApiError::new(403, "auth_denied", "access denied"),
        DirectoryError::NotFound(what) => {
            ApiError::new(404, "not_found", format!("`{what}` not found"))
        }
        DirectoryError::DuplicateName(name) => ApiError::new(
            409,
            "duplicate_name",
            format!("display name `{name}` already exists within its parent"),
        ),
        DirectoryError::BadGeolocation(msg) => {
            ApiError::new(400, "validation_failed", msg.clone())
        }
        DirectoryError::Parse(e) => ApiError::new(400, "parse_error", e.to_string())
            .with_detail(serde_json::json!({ "line": e.line() })),
        DirectoryError::ValidationErrors(n) => ApiError::new(
            422,
            "validation_failed",
            format!("model has {n} outstanding validation error(s)"),
        ),
        DirectoryError::Graph(e) => graph_error(e),
    }
}

fn graph_error(err: &GraphError) -> ApiError {
    match err {
        GraphError::NotFound(g) => ApiError::new(404, "not_found", format!("graph `{g}` not found")),
        GraphError::AlreadyExists(g) => {
            ApiError::new(409, "duplicate_name", format!("graph `{g}` already exists"))
        }
        GraphError::Immutable(g) => ApiError::new(
            409,
            "immutable_model",
            format!("graph `{g}` is published and immutable"),
        ),
        other => ApiError::new(400, "bad_request", other.to_string()),
    }
}

fn briql_error(err: &BriqlError) -> ApiError {
    match err {
        BriqlError::Parse { path, message } => {
            ApiError::new(400, "bad_query", format!("{path}: {message}"))
                .with_detail(serde_json::json!({ "path": path }))
        }
        BriqlError::ResourceLimit(what) => ApiError::new(
            429,
            "qos_exceeded",
            format!("query exceeded its resource ceiling ({what})"),
        ),
        BriqlError::StoredQueryNotFound { id, version } => ApiError::new(
            404,
            "not_found",
            format!("stored query `{id}` version {version} not found"),
        ),
        BriqlError::BadArgument(name) => ApiError::new(
            400,
            "bad_query",
            format!("argument `{name}` does not match any declared variable"),
        ),
        BriqlError::Ontology(e) => ApiError::new(400, "bad_query", e.to_string()),
        BriqlError::Graph(e) => graph_error(e),
    }
}

fn timeseries_error(err: &TimeseriesError) -> ApiError {
    match err {
        TimeseriesError::UnknownStream(id) => {
            ApiError::new(404, "not_found", format!("stream `{id}` not found"))
        }
        TimeseriesError::DuplicateStream(id) => ApiError::new(
            409,
            "duplicate_name",
            format!("stream `{id}` already exists"),
        ),
        other => ApiError::new(400, "bad_request", other.to_string()),
    }
}

fn ingest_error(err: &IngestError) -> ApiError {
    match err {
        IngestError::Schema { path, message } => {
            ApiError::new(400, "schema_violation", format!("{path}: {message}"))
                .with_detail(serde_json::json!({ "path": path }))
        }
        IngestError::BadTimestamp { path, message } => {
            ApiError::new(400, "schema_violation", format!("{path}: {message}"))
                .with_detail(serde_json::json!({ "path": path }))
        }
        IngestError::Nem12 { line, message } => {
            ApiError::new(400, "parse_error", format!("line {line}: {message}"))
                .with_detail(serde_json::json!({ "line": line }))
        }
        IngestError::UnsupportedRecord { line, record } => ApiError::new(
            400,
            "unsupported_record",
            format!("line {line}: record type {record} is not supported"),
        ),
        IngestError::UnknownStreamInRule(id) => ApiError::new(
            404,
            "not_found",
            format!("mapping rule references unknown stream `{id}`"),
        ),
        IngestError::Timeseries(e) => timeseries_error(e),
    }
}

fn app_error(err: &AppError) -> ApiError {
    match err {
        AppError::UnknownApp(_) | AppError::UnknownVersion { .. } | AppError::UnknownInstall(_) => {
            ApiError::new(404, "not_found", err.to_string())
        }
        AppError::UnknownEntrypoint(_)
        | AppError::InvalidDiscoveryQuery(_)
        | AppError::BadConfig(_) => ApiError::new(400, "bad_request", err.to_string()),
        AppError::NotBound(_) => ApiError::new(409, "not_bound", err.to_string()),
        AppError::RunInProgress(_) => ApiError::new(409, "run_in_progress", err.to_string()),
        AppError::SandboxViolation(_) => ApiError::new(409, "sandbox_violation", err.to_string()),
        AppError::EntrypointFailure(_) => ApiError::new(422, "app_failure", err.to_string()),
        AppError::WallTimeExceeded(_) => ApiError::new(429, "qos_exceeded", err.to_string()),
        AppError::Mv(e) => mv_error(e),
        AppError::Timeseries(e) => timeseries_error(e),
    }
}

fn mv_error(err: &MvError) -> ApiError {
    match err {
        MvError::Timeseries(e) => timeseries_error(e),
        other => ApiError::new(422, "mv_error", other.to_string()),
    }
}
