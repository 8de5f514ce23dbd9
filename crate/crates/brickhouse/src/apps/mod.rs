//! Application packaging, discovery-query binding at install time, and
//! sandboxed execution.
//!
//! An app package names a registered analytic procedure and carries a
//! discovery query. Installing an app runs the discovery query against the
//! target's published model and freezes the resolved bindings into the
//! installation. Running an installation executes the procedure inside a
//! capability sandbox: it receives only its bindings, its config, a read
//! handle scoped to the bound streams, and a write handle scoped to its own
//! output streams. Any attempt to reach other streams or external
//! endpoints fails and is recorded; a recorded violation aborts the run.

mod procedures;

pub use procedures::{MvOptionCProcedure, SandboxProbeProcedure};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::briql::{BriqlError, BriqlResponse};
use crate::graph::NamedGraph;
use crate::mv::{MvError, StreamReader};
use crate::ontology::Ontology;
use crate::rdf::Iri;
use crate::timeseries::{
    Observation, QuantityKind, StreamMeta, TimeseriesError, TimeseriesStore, Window,
};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("app `{0}` not found")]
    UnknownApp(String),
    #[error("app `{id}` version {version} not found")]
    UnknownVersion { id: String, version: u32 },
    #[error("entrypoint `{0}` is not a registered analytic procedure")]
    UnknownEntrypoint(String),
    #[error("invalid discovery query: {0}")]
    InvalidDiscoveryQuery(#[from] BriqlError),
    #[error("installation `{0}` not found")]
    UnknownInstall(String),
    #[error("installation `{0}` is not bound (discovery failed)")]
    NotBound(String),
    #[error("installation `{0}` already has a run in progress")]
    RunInProgress(String),
    #[error("sandbox violation: {0}")]
    SandboxViolation(String),
    #[error("run exceeded its wall-time ceiling of {0:?}")]
    WallTimeExceeded(std::time::Duration),
    #[error("entrypoint failure: {0}")]
    EntrypointFailure(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Mv(#[from] MvError),
    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceRequest {
    pub memory_mb: u32,
    pub cpu_units: f64,
}

impl Default for ResourceRequest {
    fn default() -> Self {
        ResourceRequest {
            memory_mb: 256,
            cpu_units: 1.0,
        }
    }
}

/// The discovery query carried by a package: inline canonical JSON, or a
/// reference to a stored query.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscoveryRef {
    Inline(String),
    Stored { query_id: String, version: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppPackage {
    pub app_id: String,
    pub version: u32,
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub resources: ResourceRequest,
    pub discovery: DiscoveryRef,
    pub entrypoint: String,
    #[serde(default)]
    pub config_schema: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum InstallState {
    Bound,
    FailedDiscovery { diagnostics: Vec<String> },
}

/// Bindings frozen into an installation at install time.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Bindings {
    /// Entities matched per discovery variable.
    pub variables: BTreeMap<String, Vec<Iri>>,
    /// Streams the run may read.
    pub streams: Vec<String>,
    /// Procedure-specific frozen data (e.g. the resolved meter expression).
    #[serde(default)]
    pub data: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Installation {
    pub install_id: String,
    pub app_id: String,
    pub app_version: u32,
    pub target: String,
    pub principal: String,
    pub config: Value,
    #[serde(flatten)]
    pub state: InstallState,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bindings: Option<Bindings>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunState {
    Completed,
    Failed,
    SandboxViolation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub install_id: String,
    pub run_seq: u32,
    pub as_of: i64,
    pub state: RunState,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub violations: Vec<String>,
    /// Output stream ids written by the run (`<install_id>/<name>`).
    pub outputs: Vec<String>,
}

// ---------------------------------------------------------------------------
// Binding and sandbox contexts
// ---------------------------------------------------------------------------

/// What a procedure sees at install time: the published model and the
/// discovery query's result. Full read access — binding runs with the
/// installer's authority, before any sandboxing.
pub struct BindContext<'a> {
    pub graph_id: &'a Iri,
    pub graph: &'a NamedGraph,
    pub ontology: &'a Ontology,
    pub target: &'a str,
    pub target_is_site: bool,
    pub target_label: &'a str,
    pub discovery: &'a BriqlResponse,
    pub config: &'a Value,
    pub stream_exists: &'a dyn Fn(&str) -> bool,
}

/// The capability boundary handed to a running procedure. Reads are scoped
/// to the bound streams and writes to the installation's own output
/// namespace; everything else — including any outbound endpoint — fails and
/// is recorded as a violation.
pub struct SandboxContext<'a> {
    install_id: String,
    as_of: i64,
    bindings: &'a Bindings,
    config: &'a Value,
    store: &'a TimeseriesStore,
    allowed: BTreeSet<String>,
    violations: Mutex<Vec<String>>,
    outputs: Mutex<Vec<String>>,
    started: std::time::Instant,
    wall_limit: std::time::Duration,
}

impl<'a> SandboxContext<'a> {
    pub fn new(
        install_id: &str,
        as_of: i64,
        bindings: &'a Bindings,
        config: &'a Value,
        store: &'a TimeseriesStore,
    ) -> Self {
        SandboxContext {
            install_id: install_id.to_string(),
            as_of,
            bindings,
            config,
            store,
            allowed: bindings.streams.iter().cloned().collect(),
            violations: Mutex::new(Vec::new()),
            outputs: Mutex::new(Vec::new()),
            started: std::time::Instant::now(),
            wall_limit: std::time::Duration::from_secs(30),
        }
    }

    /// Overrides the run's wall-time ceiling (resource requests are
    /// recorded in the package; wall time is the enforced limit).
    pub fn with_wall_limit(mut self, limit: std::time::Duration) -> Self {
        self.wall_limit = limit;
        self
    }

    fn check_wall(&self) -> Result<(), AppError> {
        if self.started.elapsed() > self.wall_limit {
            Err(AppError::WallTimeExceeded(self.wall_limit))
        } else {
            Ok(())
        }
    }

    pub fn bindings(&self) -> &Bindings {
        self.bindings
    }

    pub fn config(&self) -> &Value {
        self.config
    }

    /// The injected reference time for this run.
    pub fn as_of(&self) -> i64 {
        self.as_of
    }

    fn violate(&self, message: String) -> AppError {
        self.violations.lock().unwrap().push(message.clone());
        AppError::SandboxViolation(message)
    }

    fn check_allowed(&self, stream_id: &str) -> Result<(), AppError> {
        self.check_wall()?;
        if self.allowed.contains(stream_id) || self.is_own_output(stream_id) {
            Ok(())
        } else {
            Err(self.violate(format!(
                "attempted to read stream `{stream_id}` outside the installation's bindings"
            )))
        }
    }

    fn is_own_output(&self, stream_id: &str) -> bool {
        stream_id.starts_with(&format!("{}/", self.install_id))
    }

    pub fn read_stream(
        &self,
        stream_id: &str,
        window: Window,
    ) -> Result<Vec<Observation>, AppError> {
        self.check_allowed(stream_id)?;
        Ok(self.store.read_window(stream_id, window)?)
    }

    pub fn stream_meta(&self, stream_id: &str) -> Result<StreamMeta, AppError> {
        self.check_allowed(stream_id)?;
        self.store
            .meta(stream_id)
            .ok_or_else(|| AppError::Timeseries(TimeseriesError::UnknownStream(stream_id.into())))
    }

    /// Writes an output stream named `<install_id>/<name>`, creating it on
    /// first use.
    pub fn write_output(
        &self,
        name: &str,
        quantity_kind: QuantityKind,
        unit: &str,
        observations: &[Observation],
    ) -> Result<String, AppError> {
        let stream_id = format!("{}/{name}", self.install_id);
        if !self.store.exists(&stream_id) {
            self.store.create_stream(StreamMeta {
                stream_id: stream_id.clone(),
                quantity_kind,
                unit: unit.to_string(),
                bound_point: None,
                expected_interval_seconds: None,
                owner_target: None,
            })?;
        }
        self.store.append(&stream_id, observations)?;
        let mut outputs = self.outputs.lock().unwrap();
        if !outputs.contains(&stream_id) {
            outputs.push(stream_id.clone());
        }
        drop(outputs);
        Ok(stream_id)
    }

    /// Outbound connectivity capability. The sandbox policy denies all
    /// egress, so this always fails and records the attempt.
    pub fn open_endpoint(&self, url: &str) -> Result<std::convert::Infallible, AppError> {
        Err(self.violate(format!(
            "attempted to open external endpoint `{url}`; runs may not communicate externally"
        )))
    }

    pub fn violations(&self) -> Vec<String> {
        self.violations.lock().unwrap().clone()
    }

    pub fn outputs(&self) -> Vec<String> {
        self.outputs.lock().unwrap().clone()
    }
}

impl StreamReader for SandboxContext<'_> {
    fn meta(&self, stream_id: &str) -> Result<StreamMeta, MvError> {
        self.stream_meta(stream_id).map_err(|_| {
            MvError::Timeseries(TimeseriesError::UnknownStream(stream_id.to_string()))
        })
    }

    fn read(&self, stream_id: &str, window: Window) -> Result<Vec<Observation>, MvError> {
        self.read_stream(stream_id, window).map_err(|_| {
            MvError::Timeseries(TimeseriesError::UnknownStream(stream_id.to_string()))
        })
    }
}

// ---------------------------------------------------------------------------
// Procedures and the registry
// ---------------------------------------------------------------------------

/// An analytic procedure: binding logic at install time and sandboxed
/// execution.
pub trait AnalyticProcedure: Send + Sync {
    /// Resolves bindings from the discovery result. The default freezes
    /// every matched entity plus any streams referenced by fetched points.
    fn bind(&self, ctx: &BindContext) -> Result<Bindings, AppError> {
        let mut variables: BTreeMap<String, Vec<Iri>> = BTreeMap::new();
        let mut streams: BTreeSet<String> = BTreeSet::new();
        for row in &ctx.discovery.solutions {
            for (name, &idx) in row {
                let entity = &ctx.discovery.entities[idx];
                let list = variables.entry(name.clone()).or_default();
                if !list.contains(&entity.id) {
                    list.push(entity.id.clone());
                }
                if let Some(points) = &entity.points {
                    for point in points {
                        if let Some(stream) = &point.stream {
                            streams.insert(stream.clone());
                        }
                    }
                }
            }
        }
        Ok(Bindings {
            variables,
            streams: streams.into_iter().collect(),
            data: Value::Null,
        })
    }

    fn run(&self, ctx: &SandboxContext) -> Result<Value, AppError>;
}

/// In-process registry of packages, installations, runs, and procedures.
#[derive(Default)]
pub struct AppRegistry {
    apps: RwLock<BTreeMap<String, Vec<AppPackage>>>,
    installs: RwLock<BTreeMap<String, Installation>>,
    runs: RwLock<BTreeMap<String, Vec<RunRecord>>>,
    procedures: RwLock<BTreeMap<String, Arc<dyn AnalyticProcedure>>>,
    next_install: Mutex<u64>,
    running: Mutex<BTreeSet<String>>,
}

impl AppRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_procedure(&self, id: &str, procedure: Arc<dyn AnalyticProcedure>) {
        self.procedures
            .write()
            .unwrap()
            .insert(id.to_string(), procedure);
    }

    pub fn procedure(&self, id: &str) -> Option<Arc<dyn AnalyticProcedure>> {
        self.procedures.read().unwrap().get(id).cloned()
    }

    /// Registers a package; the version auto-increments per app id and the
    /// stored package is immutable.
    pub fn register_app(&self, mut package: AppPackage) -> Result<(String, u32), AppError> {
        if self.procedure(&package.entrypoint).is_none() {
            return Err(AppError::UnknownEntrypoint(package.entrypoint));
        }
        if let DiscoveryRef::Inline(doc) = &package.discovery {
            crate::briql::parse_query(doc)?;
        }
        let mut apps = self.apps.write().unwrap();
        let versions = apps.entry(package.app_id.clone()).or_default();
        package.version = versions.last().map_or(1, |p| p.version + 1);
        let out = (package.app_id.clone(), package.version);
        versions.push(package);
        Ok(out)
    }

    pub fn package(&self, app_id: &str, version: u32) -> Result<AppPackage, AppError> {
        self.apps
            .read()
            .unwrap()
            .get(app_id)
            .ok_or_else(|| AppError::UnknownApp(app_id.to_string()))?
            .iter()
            .find(|p| p.version == version)
            .cloned()
            .ok_or(AppError::UnknownVersion {
                id: app_id.to_string(),
                version,
            })
    }

    pub fn latest_version(&self, app_id: &str) -> Option<u32> {
        self.apps
            .read()
            .unwrap()
            .get(app_id)
            .and_then(|v| v.last())
            .map(|p| p.version)
    }

    pub fn list_apps(&self) -> Vec<AppPackage> {
        self.apps
            .read()
            .unwrap()
            .values()
            .flat_map(|v| v.iter().cloned())
            .collect()
    }

    pub fn next_install_id(&self) -> String {
        let mut n = self.next_install.lock().unwrap();
        *n += 1;
        format!("install-{n}")
    }

    pub fn put_installation(&self, install: Installation) {
        self.installs
            .write()
            .unwrap()
            .insert(install.install_id.clone(), install);
    }

    pub fn installation(&self, install_id: &str) -> Result<Installation, AppError> {
        self.installs
            .read()
            .unwrap()
            .get(install_id)
            .cloned()
            .ok_or_else(|| AppError::UnknownInstall(install_id.to_string()))
    }

    /// At most one run per installation at a time.
    pub fn begin_run(&self, install_id: &str) -> Result<RunGuard<'_>, AppError> {
        let mut running = self.running.lock().unwrap();
        if !running.insert(install_id.to_string()) {
            return Err(AppError::RunInProgress(install_id.to_string()));
        }
        Ok(RunGuard {
            registry: self,
            install_id: install_id.to_string(),
        })
    }

    pub fn record_run(&self, record: RunRecord) {
        self.runs
            .write()
            .unwrap()
            .entry(record.install_id.clone())
            .or_default()
            .push(record);
    }

    pub fn next_run_seq(&self, install_id: &str) -> u32 {
        self.runs
            .read()
            .unwrap()
            .get(install_id)
            .and_then(|r| r.last())
            .map_or(1, |r| r.run_seq + 1)
    }

    pub fn latest_run(&self, install_id: &str) -> Option<RunRecord> {
        self.runs
            .read()
            .unwrap()
            .get(install_id)
            .and_then(|r| r.last())
            .cloned()
    }

    // -- persistence ----------------------------------------------------------

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct State<'a> {
            apps: &'a BTreeMap<String, Vec<AppPackage>>,
            installs: &'a BTreeMap<String, Installation>,
            runs: &'a BTreeMap<String, Vec<RunRecord>>,
            next_install: u64,
        }
        serde_json::to_string_pretty(&State {
            apps: &self.apps.read().unwrap(),
            installs: &self.installs.read().unwrap(),
            runs: &self.runs.read().unwrap(),
            next_install: *self.next_install.lock().unwrap(),
        })
        .unwrap()
    }

    pub fn load_json(&self, text: &str) -> Result<(), String> {
        #[derive(Deserialize)]
        struct State {
            apps: BTreeMap<String, Vec<AppPackage>>,
            installs: BTreeMap<String, Installation>,
            runs: BTreeMap<String, Vec<RunRecord>>,
            next_install: u64,
        }
        let state: State = serde_json::from_str(text).map_err(|e| e.to_string())?;
        *self.apps.write().unwrap() = state.apps;
        *self.installs.write().unwrap() = state.installs;
        *self.runs.write().unwrap() = state.runs;
        *self.next_install.lock().unwrap() = state.next_install;
        Ok(())
    }
}

/// Clears the per-installation run exclusivity flag on drop.
pub struct RunGuard<'a> {
    registry: &'a AppRegistry,
    install_id: String,
}

impl Drop for RunGuard<'_> {
    fn drop(&mut self) {
        self.registry
            .running
            .lock()
            .unwrap()
            .remove(&self.install_id);
    }
}
