//! The HTTP service. Paths follow a stable map (`/queries:invoke`,
//! `/entities/{id}:describe`, ...) so routing is a single exact-path
//! dispatcher; every handler is a thin adapter over the platform.
//!
//! Authentication is a static bearer-token table mapping tokens to
//! principals; every endpoint except `/healthz` rejects absent or unknown
//! tokens before touching any store.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Request, State};
use axum::http::{header, Method, StatusCode};
use axum::response::Response;
use axum::Router;
use chrono::DateTime;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ApiError;
use crate::apps::{AppPackage, DiscoveryRef, ResourceRequest};
use crate::briql::query_to_canonical_json;
use crate::directory::{Role, Scope};
use crate::ingest::MappingRule;
use crate::platform::{Platform, QueryRef};
use crate::rdf::Iri;
use crate::timeseries::{QuantityKind, StreamMeta, Window};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrantEntry {
    pub scope: String,
    pub role: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenEntry {
    pub token: String,
    pub principal: String,
    #[serde(default)]
    pub grants: Vec<GrantEntry>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LimitsConfig {
    pub max_bindings: Option<u64>,
    pub max_wall_seconds: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ServerConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    /// Optional ontology file replacing the shipped subset.
    #[serde(default)]
    pub ontology_file: Option<PathBuf>,
    #[serde(default)]
    pub tokens: Vec<TokenEntry>,
    #[serde(default)]
    pub limits: LimitsConfig,
}

fn default_bind() -> String {
    "127.0.0.1:8321".to_string()
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Environment variables override the file: `BRICKHOUSE_BIND`,
    /// `BRICKHOUSE_DATA_DIR`.
    pub fn apply_env(&mut self) {
        if let Ok(bind) = std::env::var("BRICKHOUSE_BIND") {
            self.bind = bind;
        }
        if let Ok(dir) = std::env::var("BRICKHOUSE_DATA_DIR") {
            self.data_dir = Some(PathBuf::from(dir));
        }
    }
}

pub struct AppState {
    pub platform: Platform,
    tokens: BTreeMap<String, String>,
}

impl AppState {
    pub fn build(config: &ServerConfig) -> Result<Self, String> {
        let mut platform = match &config.data_dir {
            Some(dir) => Platform::open(dir).map_err(|e| e.to_string())?,
            None => Platform::new(),
        };
        if let Some(path) = &config.ontology_file {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            let ontology = crate::ontology::Ontology::load(&text).map_err(|e| e.to_string())?;
            // A custom ontology implies a fresh store; data directories are
            // bound to the vocabulary they were written under.
            let mut fresh = Platform::with_ontology(Arc::new(ontology));
            std::mem::swap(&mut platform, &mut fresh);
        }
        let mut limits = platform.limits();
        if let Some(n) = config.limits.max_bindings {
            limits.max_bindings = n;
        }
        if let Some(s) = config.limits.max_wall_seconds {
            limits.max_wall = std::time::Duration::from_secs(s);
        }
        platform.set_limits(limits);

        let mut tokens = BTreeMap::new();
        for entry in &config.tokens {
            tokens.insert(entry.token.clone(), entry.principal.clone());
            for grant in &entry.grants {
                let scope: Scope = grant.scope.parse()?;
                let role: Role = grant.role.parse()?;
                platform.directory.add_grant(&entry.principal, scope, role);
            }
        }
        Ok(AppState { platform, tokens })
    }

    fn authenticate(&self, headers: &axum::http::HeaderMap) -> Result<String, ApiError> {
        let value = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .ok_or_else(ApiError::unauthenticated)?;
        let token = value
            .strip_prefix("Bearer ")
            .ok_or_else(ApiError::unauthenticated)?;
        self.tokens
            .get(token)
            .cloned()
            .ok_or_else(ApiError::unauthenticated)
    }
}

/// Runs the service until interrupted, then flushes persistence.
pub async fn serve(config: ServerConfig) -> Result<(), String> {
    let state = Arc::new(AppState::build(&config)?);
    let app = Router::new()
        .fallback(dispatch)
        .with_state(state.clone());
    let listener = tokio::net::TcpListener::bind(&config.bind)
        .await
        .map_err(|e| format!("bind {}: {e}", config.bind))?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    println!("{}", json!({ "listening": addr.to_string() }));
    use std::io::Write;
    std::io::stdout().flush().ok();

    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown_signal())
        .await
        .map_err(|e| e.to_string())?;
    state.platform.save().map_err(|e| e.to_string())?;
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        tokio::signal::ctrl_c().await.ok();
    };
    #[cfg(unix)]
    let terminate = async {
        tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())
            .expect("signal handler")
            .recv()
            .await;
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}

fn json_response(status: StatusCode, value: &impl Serialize) -> Response {
    Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(serde_json::to_vec_pretty(value).unwrap()))
        .unwrap()
}

fn error_response(err: ApiError) -> Response {
    let status = StatusCode::from_u16(err.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    json_response(status, &err)
}

fn ok(value: impl Serialize) -> Result<Response, ApiError> {
    Ok(json_response(StatusCode::OK, &value))
}

fn platform_err(err: crate::platform::PlatformError) -> ApiError {
    (&err).into()
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            if let (Some(h), Some(l)) = (
                bytes.get(i + 1).and_then(|b| (*b as char).to_digit(16)),
                bytes.get(i + 2).and_then(|b| (*b as char).to_digit(16)),
            ) {
                out.push((h * 16 + l) as u8);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn query_params(uri: &axum::http::Uri) -> Vec<(String, String)> {
    uri.query()
        .unwrap_or("")
        .split('&')
        .filter(|p| !p.is_empty())
        .map(|pair| match pair.split_once('=') {
            Some((k, v)) => (percent_decode(k), percent_decode(&v.replace('+', " "))),
            None => (percent_decode(pair), String::new()),
        })
        .collect()
}

fn param<'a>(params: &'a [(String, String)], name: &str) -> Option<&'a str> {
    params
        .iter()
        .find(|(k, _)| k == name)
        .map(|(_, v)| v.as_str())
}

/// Accepts epoch seconds or an RFC 3339 timestamp.
fn parse_time(text: &str) -> Result<i64, ApiError> {
    if let Ok(seconds) = text.parse::<i64>() {
        return Ok(seconds);
    }
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.timestamp())
        .map_err(|e| ApiError::new(400, "bad_request", format!("bad timestamp `{text}`: {e}")))
}

/// Accepts seconds or `+HH:MM` / `-HH:MM` UTC offsets.
fn parse_offset(text: &str) -> Result<i64, ApiError> {
    if let Ok(seconds) = text.parse::<i64>() {
        return Ok(seconds);
    }
    let (sign, rest) = match text.split_at_checked(1) {
        Some(("+", rest)) => (1, rest),
        Some(("-", rest)) => (-1, rest),
        _ => {
            return Err(ApiError::new(
                400,
                "bad_request",
                format!("bad UTC offset `{text}`"),
            ))
        }
    };
    let (h, m) = rest.split_once(':').ok_or_else(|| {
        ApiError::new(400, "bad_request", format!("bad UTC offset `{text}`"))
    })?;
    let hours: i64 = h.parse().map_err(|_| {
        ApiError::new(400, "bad_request", format!("bad UTC offset `{text}`"))
    })?;
    let minutes: i64 = m.parse().map_err(|_| {
        ApiError::new(400, "bad_request", format!("bad UTC offset `{text}`"))
    })?;
    Ok(sign * (hours * 3600 + minutes * 60))
}

fn window_from(params: &[(String, String)]) -> Result<Window, ApiError> {
    let start = parse_time(
        param(params, "start")
            .ok_or_else(|| ApiError::new(400, "bad_request", "missing `start`"))?,
    )?;
    let end = parse_time(
        param(params, "end").ok_or_else(|| ApiError::new(400, "bad_request", "missing `end`"))?,
    )?;
    Window::new(start, end)
        .map_err(|e| ApiError::new(400, "bad_request", e.to_string()))
}

fn body_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes)
        .map_err(|e| ApiError::new(400, "bad_request", format!("malformed request body: {e}")))
}

async fn dispatch(State(state): State<Arc<AppState>>, req: Request) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let headers = req.headers().clone();
    let body = match axum::body::to_bytes(req.into_body(), 64 * 1024 * 1024).await {
        Ok(bytes) => bytes,
        Err(e) => {
            return error_response(ApiError::new(400, "bad_request", e.to_string()));
        }
    };
    let result = tokio::task::spawn_blocking(move || {
        handle(&state, method, &uri, &headers, &body)
    })
    .await;
    match result {
        Ok(Ok(response)) => response,
        Ok(Err(err)) => error_response(err),
        Err(e) => error_response(ApiError::new(500, "internal", e.to_string())),
    }
}

fn handle(
    state: &AppState,
    method: Method,
    uri: &axum::http::Uri,
    headers: &axum::http::HeaderMap,
    body: &[u8],
) -> Result<Response, ApiError> {
    let path = uri.path().to_string();
    let segments: Vec<&str> = path.trim_start_matches('/').split('/').collect();
    let params = query_params(uri);

    if method == Method::GET && segments == ["healthz"] {
        return ok(json!({ "status": "ok" }));
    }

    // Every other endpoint authenticates before touching any store.
    let principal = state.authenticate(headers)?;
    let platform = &state.platform;

    match (&method, segments.as_slice()) {
        // -- directory ---------------------------------------------------------
        (&Method::POST, ["orgs"]) => {
            #[derive(Deserialize)]
            struct Req {
                display_name: String,
            }
            let req: Req = body_json(body)?;
            let org_id = platform
                .directory
                .create_org(&req.display_name, &principal)
                .map_err(|e| platform_err(e.into()))?;
            ok(json!({ "org_id": org_id }))
        }
        (&Method::GET, ["orgs"]) => {
            let orgs: Vec<_> = platform
                .directory
                .orgs()
                .into_iter()
                .filter(|o| {
                    platform.directory.check_access(
                        &principal,
                        &Scope::Org(o.org_id.clone()),
                        Role::Reader,
                    )
                })
                .collect();
            ok(orgs)
        }
        (&Method::POST, ["orgs", org, "sites"]) => {
            #[derive(Deserialize)]
            struct Req {
                display_name: String,
                latitude: f64,
                longitude: f64,
                #[serde(default)]
                address: String,
                #[serde(default)]
                cadastral_ref: Option<String>,
            }
            let req: Req = body_json(body)?;
            let site_id = platform
                .directory
                .create_site(
                    &percent_decode(org),
                    &req.display_name,
                    req.latitude,
                    req.longitude,
                    &req.address,
                    req.cadastral_ref,
                    &principal,
                )
                .map_err(|e| platform_err(e.into()))?;
            ok(json!({ "site_id": site_id }))
        }
        (&Method::GET, ["sites"]) => {
            let sites: Vec<_> = platform
                .directory
                .sites()
                .into_iter()
                .filter(|s| {
                    platform.directory.check_access(
                        &principal,
                        &Scope::Site(s.site_id.clone()),
                        Role::Reader,
                    )
                })
                .collect();
            ok(sites)
        }
        (&Method::POST, ["sites", site, "buildings"]) => {
            #[derive(Deserialize)]
            struct Req {
                display_name: String,
            }
            let req: Req = body_json(body)?;
            let building_id = platform
                .directory
                .create_building(&percent_decode(site), &req.display_name, &principal)
                .map_err(|e| platform_err(e.into()))?;
            ok(json!({ "building_id": building_id }))
        }
        (&Method::GET, ["buildings"]) => {
            let buildings: Vec<_> = platform
                .directory
                .buildings()
                .into_iter()
                .filter(|b| {
                    platform.directory.check_access(
                        &principal,
                        &Scope::Building(b.building_id.clone()),
                        Role::Reader,
                    )
                })
                .collect();
            ok(buildings)
        }

        // -- model lifecycle -----------------------------------------------------
        (&Method::PUT, ["targets", target, "model", "draft"]) => {
            let document = String::from_utf8_lossy(body);
            let version = platform
                .upload_draft(&percent_decode(target), &document, &principal)
                .map_err(platform_err)?;
            ok(version)
        }
        (&Method::POST, ["targets", target, "model", "validate"]) => {
            #[derive(Deserialize)]
            struct Req {
                version: u32,
            }
            let req: Req = body_json(body)?;
            let target = percent_decode(target);
            let scope = platform
                .directory
                .target_scope(&target)
                .ok_or_else(ApiError::not_found)?;
            if !platform
                .directory
                .check_access(&principal, &scope, Role::Reader)
            {
                return Err(ApiError::not_found());
            }
            let report = platform
                .validate_model(&target, req.version)
                .map_err(platform_err)?;
            ok(report)
        }
        (&Method::POST, ["targets", target, "model", "publish"]) => {
            #[derive(Deserialize)]
            struct Req {
                version: u32,
            }
            let req: Req = body_json(body)?;
            let version = platform
                .publish_model(&percent_decode(target), req.version, &principal)
                .map_err(platform_err)?;
            ok(version)
        }

        // -- queries ------------------------------------------------------------
        (&Method::POST, ["queries"]) => {
            #[derive(Deserialize)]
            struct Req {
                query_id: String,
                body: Value,
                #[serde(default)]
                owner_org: Option<String>,
            }
            let req: Req = body_json(body)?;
            let (query_id, version) = platform
                .store_query(&req.query_id, &req.body.to_string(), req.owner_org)
                .map_err(platform_err)?;
            platform.persist_queries().map_err(platform_err)?;
            ok(json!({ "query_id": query_id, "version": version }))
        }
        (&Method::GET, ["queries", id]) => {
            let id = percent_decode(id);
            let version = match param(&params, "version") {
                Some(v) => v.parse::<u32>().map_err(|_| {
                    ApiError::new(400, "bad_request", "bad `version` parameter")
                })?,
                None => platform
                    .queries
                    .latest_version(&id)
                    .ok_or_else(ApiError::not_found)?,
            };
            let stored = platform
                .queries
                .get(&id, version)
                .map_err(|e| platform_err(e.into()))?;
            ok(stored)
        }
        (&Method::POST, ["queries:invoke"]) => {
            #[derive(Deserialize)]
            struct RefReq {
                query_id: String,
                #[serde(default)]
                version: Option<u32>,
            }
            #[derive(Deserialize)]
            struct Req {
                #[serde(default)]
                query: Option<Value>,
                #[serde(default)]
                query_ref: Option<RefReq>,
                models: Vec<String>,
                #[serde(default)]
                args: BTreeMap<String, String>,
            }
            let req: Req = body_json(body)?;
            let query = match (&req.query, &req.query_ref) {
                (Some(doc), None) => QueryRef::Inline(doc.to_string()),
                (None, Some(r)) => QueryRef::Stored {
                    query_id: r.query_id.clone(),
                    version: r.version,
                },
                _ => {
                    return Err(ApiError::new(
                        400,
                        "bad_request",
                        "provide exactly one of `query` or `query_ref`",
                    ))
                }
            };
            let mut args = BTreeMap::new();
            for (name, iri) in &req.args {
                args.insert(
                    name.clone(),
                    Iri::new(iri.clone()).map_err(|e| {
                        ApiError::new(400, "bad_request", format!("arg `{name}`: {e}"))
                    })?,
                );
            }
            let response = platform
                .invoke_query(&query, &req.models, &args, &principal)
                .map_err(platform_err)?;
            ok(response)
        }
        (&Method::GET, [ "entities", tail ]) if tail.ends_with(":describe") => {
            let encoded = tail.strip_suffix(":describe").unwrap();
            let entity = Iri::new(percent_decode(encoded))
                .map_err(|e| ApiError::new(400, "bad_request", e.to_string()))?;
            let models: Vec<String> = params
                .iter()
                .filter(|(k, _)| k == "model")
                .map(|(_, v)| v.clone())
                .collect();
            if models.is_empty() {
                return Err(ApiError::new(
                    400,
                    "bad_request",
                    "at least one `model` parameter is required",
                ));
            }
            let description = platform
                .describe_entity(&entity, &models, &principal)
                .map_err(platform_err)?;
            ok(description)
        }

        // -- ingestion ------------------------------------------------------------
        (&Method::POST, ["ingest", "dch-json"]) => {
            #[derive(Deserialize)]
            struct Req {
                payload: Value,
                #[serde(default)]
                rules: Vec<MappingRule>,
            }
            let req: Req = body_json(body)?;
            let report = platform
                .ingest_dch(&req.payload.to_string(), &req.rules, &principal)
                .map_err(platform_err)?;
            ok(report)
        }
        (&Method::POST, ["ingest", "nem12"]) => {
            // NEM12 is uploaded as a text body; parameters ride the query
            // string: offset, stream (single-NMI default), map=<nmi>=<stream>,
            // owner.
            let text = String::from_utf8_lossy(body);
            let offset = match param(&params, "offset") {
                Some(o) => parse_offset(o)?,
                None => 0,
            };
            let mut assignments = BTreeMap::new();
            for (k, v) in params.iter().filter(|(k, _)| k == "map") {
                let _ = k;
                let (nmi, stream) = v.split_once('=').ok_or_else(|| {
                    ApiError::new(400, "bad_request", "map must be `<nmi>=<stream>`")
                })?;
                assignments.insert(nmi.to_string(), stream.to_string());
            }
            let report = platform
                .ingest_nem12(
                    &text,
                    offset,
                    &assignments,
                    param(&params, "stream"),
                    param(&params, "owner"),
                    &principal,
                )
                .map_err(platform_err)?;
            ok(report)
        }

        // -- streams ---------------------------------------------------------------
        (&Method::POST, ["streams"]) => {
            #[derive(Deserialize)]
            struct Req {
                stream_id: String,
                quantity_kind: String,
                unit: String,
                #[serde(default)]
                bound_point: Option<String>,
                #[serde(default)]
                expected_interval_seconds: Option<i64>,
                #[serde(default)]
                owner_target: Option<String>,
            }
            let req: Req = body_json(body)?;
            let quantity_kind: QuantityKind = req
                .quantity_kind
                .parse()
                .map_err(|e: String| ApiError::new(400, "bad_request", e))?;
            let bound_point = match req.bound_point {
                Some(p) => Some(
                    Iri::new(p).map_err(|e| ApiError::new(400, "bad_request", e.to_string()))?,
                ),
                None => None,
            };
            let meta = StreamMeta {
                stream_id: req.stream_id.clone(),
                quantity_kind,
                unit: req.unit,
                bound_point,
                expected_interval_seconds: req.expected_interval_seconds,
                owner_target: req.owner_target,
            };
            platform
                .create_stream(meta, &principal)
                .map_err(platform_err)?;
            ok(json!({ "stream_id": req.stream_id }))
        }
        (&Method::GET, ["streams", id, "observations"]) => {
            let window = window_from(&params)?;
            let observations = platform
                .read_stream(&percent_decode(id), window, &principal)
                .map_err(platform_err)?;
            ok(observations)
        }
        (&Method::GET, ["streams", id, "health"]) => {
            let window = window_from(&params)?;
            let interval = match param(&params, "interval") {
                Some(i) => Some(i.parse::<i64>().map_err(|_| {
                    ApiError::new(400, "bad_request", "bad `interval` parameter")
                })?),
                None => None,
            };
            let now = match param(&params, "now") {
                Some(n) => parse_time(n)?,
                None => chrono::Utc::now().timestamp(),
            };
            let report = platform
                .stream_health(&percent_decode(id), window, interval, now, &principal)
                .map_err(platform_err)?;
            ok(report)
        }

        // -- apps --------------------------------------------------------------------
        (&Method::POST, ["apps"]) => {
            #[derive(Deserialize)]
            struct StoredRef {
                query_id: String,
                version: u32,
            }
            #[derive(Deserialize)]
            struct Req {
                app_id: String,
                name: String,
                #[serde(default)]
                description: String,
                #[serde(default)]
                resources: Option<ResourceRequest>,
                entrypoint: String,
                #[serde(default)]
                config_schema: Value,
                #[serde(default)]
                discovery_query: Option<Value>,
                #[serde(default)]
                discovery_ref: Option<StoredRef>,
            }
            let req: Req = body_json(body)?;
            let discovery = match (&req.discovery_query, &req.discovery_ref) {
                (Some(doc), None) => {
                    let parsed = crate::briql::parse_query(&doc.to_string())
                        .map_err(|e| platform_err(e.into()))?;
                    DiscoveryRef::Inline(query_to_canonical_json(&parsed))
                }
                (None, Some(r)) => DiscoveryRef::Stored {
                    query_id: r.query_id.clone(),
                    version: r.version,
                },
                _ => {
                    return Err(ApiError::new(
                        400,
                        "bad_request",
                        "provide exactly one of `discovery_query` or `discovery_ref`",
                    ))
                }
            };
            let package = AppPackage {
                app_id: req.app_id,
                version: 0,
                name: req.name,
                description: req.description,
                resources: req.resources.unwrap_or_default(),
                discovery,
                entrypoint: req.entrypoint,
                config_schema: req.config_schema,
            };
            let (app_id, version) = platform.register_app(package).map_err(platform_err)?;
            ok(json!({ "app_id": app_id, "version": version }))
        }
        (&Method::POST, ["apps", app_id, "installs"]) => {
            #[derive(Deserialize)]
            struct Req {
                #[serde(default)]
                version: Option<u32>,
                target: String,
                #[serde(default)]
                config: Value,
            }
            let req: Req = body_json(body)?;
            let app_id = percent_decode(app_id);
            let version = match req.version {
                Some(v) => v,
                None => platform
                    .apps
                    .latest_version(&app_id)
                    .ok_or_else(ApiError::not_found)?,
            };
            let installation = platform
                .install_app(&app_id, version, &req.target, req.config, &principal)
                .map_err(platform_err)?;
            ok(installation)
        }
        (&Method::POST, ["installs", tail]) if tail.ends_with(":run") => {
            #[derive(Deserialize, Default)]
            struct Req {
                #[serde(default)]
                as_of: Option<Value>,
            }
            let req: Req = if body.is_empty() {
                Req::default()
            } else {
                body_json(body)?
            };
            let as_of = match req.as_of {
                Some(Value::Number(n)) => n.as_i64().ok_or_else(|| {
                    ApiError::new(400, "bad_request", "bad `as_of`")
                })?,
                Some(Value::String(s)) => parse_time(&s)?,
                None => chrono::Utc::now().timestamp(),
                Some(_) => return Err(ApiError::new(400, "bad_request", "bad `as_of`")),
            };
            let install_id = percent_decode(tail.strip_suffix(":run").unwrap());
            let record = platform
                .run_app(&install_id, as_of, &principal)
                .map_err(platform_err)?;
            ok(record)
        }
        (&Method::GET, ["installs", id, "result"]) => {
            let record = platform
                .run_result(&percent_decode(id), &principal)
                .map_err(platform_err)?;
            ok(record)
        }
        (&Method::GET, ["installs", id]) => {
            let installation = platform
                .apps
                .installation(&percent_decode(id))
                .map_err(|_| ApiError::not_found())?;
            let scope = platform
                .directory
                .target_scope(&installation.target)
                .ok_or_else(ApiError::not_found)?;
            if !platform
                .directory
                .check_access(&principal, &scope, Role::Reader)
            {
                return Err(ApiError::not_found());
            }
            ok(installation)
        }

        _ => Err(ApiError::not_found()),
    }
}
