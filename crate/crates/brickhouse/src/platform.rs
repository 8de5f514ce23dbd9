//! The assembled kernel: one façade owning the ontology, graph store,
//! directory, time-series store, stored queries, and app registry, with
//! principal-checked operations and on-disk persistence.
//!
//! Every method here is a thin composition over the per-module contracts;
//! the modules stay usable on their own.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::apps::{
    AppError, AppPackage, AppRegistry, BindContext, InstallState, Installation,
    MvOptionCProcedure, RunRecord, RunState, SandboxContext, SandboxProbeProcedure,
};
use crate::briql::{
    self, BriqlError, BriqlQuery, BriqlResponse, PointInfo, QueryLimits, StoredQueryRegistry,
};
use crate::directory::{Directory, DirectoryError, Role};
use crate::graph::{GraphError, GraphStore, NamedGraph};
use crate::ingest::{
    self, HealthFinding, HealthPolicy, IngestError, IngestReport, MappingRule, RangeBounds,
};
use crate::mv::MvError;
use crate::ontology::Ontology;
use crate::rdf::{Iri, Literal};
use crate::timeseries::{
    Observation, QuantityKind, StreamMeta, TimeseriesError, TimeseriesStore, Window,
};

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error("access denied")]
    Denied,
    #[error("access denied for models: {0:?}")]
    ModelsDenied(Vec<String>),
    #[error("bindings reference streams the installer cannot read: {0:?}")]
    StreamAccessDenied(Vec<String>),
    #[error("`{0}` not found")]
    NotFound(String),
    #[error("target `{0}` has no published model")]
    NoPublishedModel(String),
    #[error(transparent)]
    Directory(#[from] DirectoryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Briql(#[from] BriqlError),
    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Mv(#[from] MvError),
    #[error("persistence: {0}")]
    Io(String),
}

/// A query by value or by stored reference.
#[derive(Debug, Clone)]
pub enum QueryRef {
    Inline(String),
    Stored { query_id: String, version: Option<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeDirection {
    Out,
    In,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationshipEdge {
    pub predicate: Iri,
    pub direction: EdgeDirection,
    pub other: Iri,
}

/// Everything known about one entity in one model.
#[derive(Debug, Clone, Serialize)]
pub struct EntityDescription {
    pub id: Iri,
    pub model: Iri,
    pub classes: Vec<Iri>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub properties: BTreeMap<String, Literal>,
    pub relationships: Vec<RelationshipEdge>,
    pub points: Vec<PointInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HealthReport {
    pub stream_id: String,
    pub window: Window,
    pub expected_interval_seconds: i64,
    pub completeness: f64,
    pub findings: Vec<HealthFinding>,
}

pub struct Platform {
    ontology: Arc<Ontology>,
    pub graphs: GraphStore,
    pub directory: Directory,
    pub timeseries: TimeseriesStore,
    pub queries: StoredQueryRegistry,
    pub apps: AppRegistry,
    limits: QueryLimits,
    data_dir: Option<PathBuf>,
}

impl Platform {
    pub fn new() -> Self {
        Self::with_ontology(Ontology::shipped())
    }

    pub fn with_ontology(ontology: Arc<Ontology>) -> Self {
        let apps = AppRegistry::new();
        apps.register_procedure("mv-optionc", Arc::new(MvOptionCProcedure));
        apps.register_procedure("sandbox-probe", Arc::new(SandboxProbeProcedure));
        Platform {
            graphs: GraphStore::new(ontology.clone()),
            ontology,
            directory: Directory::new(),
            timeseries: TimeseriesStore::new(),
            queries: StoredQueryRegistry::new(),
            apps,
            limits: QueryLimits::default(),
            data_dir: None,
        }
    }

    pub fn ontology(&self) -> &Arc<Ontology> {
        &self.ontology
    }

    pub fn set_limits(&mut self, limits: QueryLimits) {
        self.limits = limits;
    }

    pub fn limits(&self) -> QueryLimits {
        self.limits
    }

    // -- query invocation -------------------------------------------------------

    fn resolve_query(&self, query: &QueryRef) -> Result<BriqlQuery, PlatformError> {
        match query {
            QueryRef::Inline(doc) => Ok(briql::parse_query(doc)?),
            QueryRef::Stored { query_id, version } => {
                let version = match version {
                    Some(v) => *v,
                    None => self.queries.latest_version(query_id).ok_or_else(|| {
                        PlatformError::NotFound(format!("stored query `{query_id}`"))
                    })?,
                };
                let stored = self.queries.get(query_id, version)?;
                Ok(briql::parse_query(&stored.body)?)
            }
        }
    }

    /// Access-checks every requested model before any evaluation, resolves
    /// published graphs, and evaluates. Results from multiple models are
    /// unioned with per-entity model attribution.
    pub fn invoke_query(
        &self,
        query: &QueryRef,
        model_targets: &[String],
        args: &BTreeMap<String, Iri>,
        principal: &str,
    ) -> Result<BriqlResponse, PlatformError> {
        let mut denied = Vec::new();
        for target in model_targets {
            let allowed = self
                .directory
                .target_scope(target)
                .is_some_and(|scope| self.directory.check_access(principal, &scope, Role::Reader));
            if !allowed {
                denied.push(target.clone());
            }
        }
        if !denied.is_empty() {
            return Err(PlatformError::ModelsDenied(denied));
        }

        let query = self.resolve_query(query)?;
        let mut graph_ids = Vec::new();
        for target in model_targets {
            let graph = self
                .directory
                .published_graph(target)
                .ok_or_else(|| PlatformError::NoPublishedModel(target.clone()))?;
            graph_ids.push(graph);
        }

        let plan = briql::plan(&self.graphs, &query, &graph_ids, args)?;
        let stream_info = self.stream_info_fn();
        Ok(briql::evaluate(
            &self.graphs,
            &query,
            &plan,
            &self.limits,
            &stream_info,
        )?)
    }

    fn stream_info_fn(&self) -> impl Fn(&str) -> Option<(String, String)> + '_ {
        |stream_id: &str| {
            self.timeseries
                .meta(stream_id)
                .map(|m| (m.unit.clone(), m.quantity_kind.to_string()))
        }
    }

    /// Shorthand for all information about one entity, searched across the
    /// requested models in order.
    pub fn describe_entity(
        &self,
        entity: &Iri,
        model_targets: &[String],
        principal: &str,
    ) -> Result<EntityDescription, PlatformError> {
        let mut denied = Vec::new();
        for target in model_targets {
            let allowed = self
                .directory
                .target_scope(target)
                .is_some_and(|scope| self.directory.check_access(principal, &scope, Role::Reader));
            if !allowed {
                denied.push(target.clone());
            }
        }
        if !denied.is_empty() {
            return Err(PlatformError::ModelsDenied(denied));
        }

        for target in model_targets {
            let graph_id = self
                .directory
                .published_graph(target)
                .ok_or_else(|| PlatformError::NoPublishedModel(target.clone()))?;
            let graph = self.graphs.snapshot(&graph_id)?;
            if let Some(description) = self.describe_in(&graph_id, &graph, entity) {
                return Ok(description);
            }
        }
        Err(PlatformError::NotFound(entity.to_string()))
    }

    fn describe_in(
        &self,
        graph_id: &Iri,
        graph: &NamedGraph,
        entity: &Iri,
    ) -> Option<EntityDescription> {
        let classes: Vec<Iri> = graph.types_of(entity).into_iter().collect();
        if classes.is_empty() && !graph.entities().contains(entity) {
            return None;
        }
        let mut relationships = Vec::new();
        for t in graph.scan(Some(entity), None, None) {
            if let (Some(_), Some(other)) =
                (self.ontology.relation(&t.predicate), t.object.iri())
            {
                relationships.push(RelationshipEdge {
                    predicate: t.predicate.clone(),
                    direction: EdgeDirection::Out,
                    other: other.clone(),
                });
            }
        }
        for t in graph.triples() {
            if t.object.iri() == Some(entity)
                && self.ontology.relation(&t.predicate).is_some()
                && &t.subject != entity
            {
                relationships.push(RelationshipEdge {
                    predicate: t.predicate.clone(),
                    direction: EdgeDirection::In,
                    other: t.subject.clone(),
                });
            }
        }
        let stream_info = self.stream_info_fn();
        let points = briql::attached_points(graph, &self.ontology, entity, &[], &stream_info);
        Some(EntityDescription {
            id: entity.clone(),
            model: graph_id.clone(),
            classes,
            label: graph.label_of(entity),
            properties: graph.properties_of(entity),
            relationships,
            points,
        })
    }

    pub fn store_query(
        &self,
        query_id: &str,
        document: &str,
        owner_org: Option<String>,
    ) -> Result<(String, u32), PlatformError> {
        let query = briql::parse_query(document)?;
        Ok(self.queries.store(query_id, &query, owner_org))
    }

    pub fn compile_sparql(&self, document: &str) -> Result<String, PlatformError> {
        let query = briql::parse_query(document)?;
        Ok(briql::compile_to_sparql_text(&query, &self.ontology)?)
    }

    // -- model lifecycle ---------------------------------------------------------

    pub fn upload_draft(
        &self,
        target: &str,
        document: &str,
        principal: &str,
    ) -> Result<crate::directory::ModelVersion, PlatformError> {
        let version = self
            .directory
            .upload_draft(target, document, principal, &self.graphs)?;
        self.persist_graphs()?;
        self.persist_directory()?;
        Ok(version)
    }

    pub fn validate_model(
        &self,
        target: &str,
        version: u32,
    ) -> Result<crate::directory::ValidationReport, PlatformError> {
        let exists = |id: &str| self.timeseries.exists(id);
        Ok(self
            .directory
            .validate_model(target, version, &self.graphs, &exists)?)
    }

    pub fn publish_model(
        &self,
        target: &str,
        version: u32,
        principal: &str,
    ) -> Result<crate::directory::ModelVersion, PlatformError> {
        let exists = |id: &str| self.timeseries.exists(id);
        let published =
            self.directory
                .publish_model(target, version, principal, &self.graphs, &exists)?;
        self.persist_graphs()?;
        self.persist_directory()?;
        Ok(published)
    }

    // -- streams and ingestion -----------------------------------------------------

    fn stream_access(
        &self,
        meta: &StreamMeta,
        principal: &str,
        needed: Role,
    ) -> Result<(), PlatformError> {
        match &meta.owner_target {
            Some(target) => {
                let scope = self
                    .directory
                    .target_scope(target)
                    .ok_or_else(|| PlatformError::NotFound(target.clone()))?;
                if self.directory.check_access(principal, &scope, needed) {
                    Ok(())
                } else {
                    Err(PlatformError::Denied)
                }
            }
            // Unowned streams are open to any authenticated principal.
            None => Ok(()),
        }
    }

    pub fn create_stream(&self, meta: StreamMeta, principal: &str) -> Result<(), PlatformError> {
        self.stream_access(&meta, principal, Role::Modeler)?;
        self.timeseries.create_stream(meta.clone())?;
        self.persist_stream_index()?;
        Ok(())
    }

    pub fn ingest_dch(
        &self,
        payload_text: &str,
        rules: &[MappingRule],
        principal: &str,
    ) -> Result<IngestReport, PlatformError> {
        let payload = ingest::parse_dch_payload(payload_text)?;
        for rule in rules {
            if let Some(meta) = self.timeseries.meta(&rule.stream_id) {
                self.stream_access(&meta, principal, Role::Modeler)?;
            }
        }
        let report = ingest::map_and_ingest(&self.timeseries, &payload, rules)?;
        for rule in rules {
            self.persist_stream_log(&rule.stream_id)?;
        }
        Ok(report)
    }

    /// NEM12 ingestion. `assignments` maps NMIs to stream ids; a default
    /// stream may be given when the document carries exactly one NMI.
    /// Missing streams are created from the document's unit-of-measure.
    pub fn ingest_nem12(
        &self,
        text: &str,
        site_utc_offset_seconds: i64,
        assignments: &BTreeMap<String, String>,
        default_stream: Option<&str>,
        owner_target: Option<&str>,
        principal: &str,
    ) -> Result<IngestReport, PlatformError> {
        let (document, series) = ingest::parse_nem12(text, site_utc_offset_seconds)?;
        let mut report = IngestReport::default();
        for block in &document.blocks {
            let stream_id = match assignments.get(&block.nmi) {
                Some(id) => id.clone(),
                None => match default_stream {
                    Some(id) if document.blocks.len() == 1 => id.to_string(),
                    _ => {
                        report.unmapped.push(block.nmi.clone());
                        continue;
                    }
                },
            };
            if let Some(meta) = self.timeseries.meta(&stream_id) {
                self.stream_access(&meta, principal, Role::Modeler)?;
            } else {
                let (quantity_kind, unit) = match block.unit.to_ascii_uppercase().as_str() {
                    "KWH" => (QuantityKind::Energy, "kWh"),
                    "WH" => (QuantityKind::Energy, "Wh"),
                    "MWH" => (QuantityKind::Energy, "MWh"),
                    "KW" => (QuantityKind::Power, "kW"),
                    "W" => (QuantityKind::Power, "W"),
                    other => {
                        return Err(PlatformError::Ingest(IngestError::Nem12 {
                            line: 0,
                            message: format!("unsupported unit of measure `{other}`"),
                        }))
                    }
                };
                let meta = StreamMeta {
                    stream_id: stream_id.clone(),
                    quantity_kind,
                    unit: unit.to_string(),
                    bound_point: None,
                    expected_interval_seconds: Some(block.interval_minutes as i64 * 60),
                    owner_target: owner_target.map(String::from),
                };
                self.stream_access(&meta, principal, Role::Modeler)?;
                self.timeseries.create_stream(meta)?;
            }
            let obs = &series[&block.nmi];
            let appended = self.timeseries.append(&stream_id, obs)?;
            report.ingested += appended.inserted;
            report.replaced += appended.replaced;
            self.persist_stream_log(&stream_id)?;
        }
        self.persist_stream_index()?;
        Ok(report)
    }

    pub fn read_stream(
        &self,
        stream_id: &str,
        window: Window,
        principal: &str,
    ) -> Result<Vec<Observation>, PlatformError> {
        let meta = self
            .timeseries
            .meta(stream_id)
            .ok_or_else(|| PlatformError::NotFound(stream_id.to_string()))?;
        // A stream the caller may not read looks exactly like a missing one.
        self.stream_access(&meta, principal, Role::Reader)
            .map_err(|_| PlatformError::NotFound(stream_id.to_string()))?;
        Ok(self.timeseries.read_window(stream_id, window)?)
    }

    /// Completeness plus data-health findings for a stream window. The
    /// reference clock is injected for reproducibility.
    pub fn stream_health(
        &self,
        stream_id: &str,
        window: Window,
        expected_interval_override: Option<i64>,
        now: i64,
        principal: &str,
    ) -> Result<HealthReport, PlatformError> {
        let meta = self
            .timeseries
            .meta(stream_id)
            .ok_or_else(|| PlatformError::NotFound(stream_id.to_string()))?;
        self.stream_access(&meta, principal, Role::Reader)
            .map_err(|_| PlatformError::NotFound(stream_id.to_string()))?;
        let interval = expected_interval_override
            .or(meta.expected_interval_seconds)
            .ok_or({
                PlatformError::Timeseries(TimeseriesError::BadInterval)
            })?;
        let completeness = self.timeseries.completeness(stream_id, window, interval)?;
        let observations = self.timeseries.read_window(stream_id, window)?;
        let range = self.point_range_bounds(&meta);
        let policy = HealthPolicy::with_now(now);
        let findings = ingest::run_health_checks(
            stream_id,
            &meta,
            &observations,
            range,
            window,
            &policy,
        );
        Ok(HealthReport {
            stream_id: stream_id.to_string(),
            window,
            expected_interval_seconds: interval,
            completeness,
            findings,
        })
    }

    /// Expected-range entity properties of the stream's bound point, looked
    /// up in the owning target's published model.
    fn point_range_bounds(&self, meta: &StreamMeta) -> RangeBounds {
        let Some(point) = &meta.bound_point else {
            return RangeBounds::default();
        };
        let Some(target) = &meta.owner_target else {
            return RangeBounds::default();
        };
        let Some(graph_id) = self.directory.published_graph(target) else {
            return RangeBounds::default();
        };
        let Ok(graph) = self.graphs.snapshot(&graph_id) else {
            return RangeBounds::default();
        };
        let props = graph.properties_of(point);
        RangeBounds {
            min: props.get("rangeMin").and_then(|l| l.as_f64()),
            max: props.get("rangeMax").and_then(|l| l.as_f64()),
        }
    }

    // -- apps ---------------------------------------------------------------------

    pub fn register_app(&self, package: AppPackage) -> Result<(String, u32), PlatformError> {
        if let crate::apps::DiscoveryRef::Stored { query_id, version } = &package.discovery {
            self.queries.get(query_id, *version)?;
        }
        let out = self.apps.register_app(package)?;
        self.persist_apps()?;
        Ok(out)
    }

    pub fn install_app(
        &self,
        app_id: &str,
        version: u32,
        target: &str,
        config: Value,
        principal: &str,
    ) -> Result<Installation, PlatformError> {
        let scope = self
            .directory
            .target_scope(target)
            .ok_or(PlatformError::Denied)?;
        if !self.directory.check_access(principal, &scope, Role::Reader) {
            return Err(PlatformError::Denied);
        }
        let package = self.apps.package(app_id, version)?;
        let graph_id = self
            .directory
            .published_graph(target)
            .ok_or_else(|| PlatformError::NoPublishedModel(target.to_string()))?;
        let graph = self.graphs.snapshot(&graph_id)?;

        let query_doc = match &package.discovery {
            crate::apps::DiscoveryRef::Inline(doc) => doc.clone(),
            crate::apps::DiscoveryRef::Stored { query_id, version } => {
                self.queries.get(query_id, *version)?.body
            }
        };
        let query = briql::parse_query(&query_doc)?;
        let plan = briql::plan(&self.graphs, &query, std::slice::from_ref(&graph_id), &BTreeMap::new())?;
        let stream_info = self.stream_info_fn();
        let discovery =
            briql::evaluate(&self.graphs, &query, &plan, &self.limits, &stream_info)?;

        let install_id = self.apps.next_install_id();
        let mut installation = Installation {
            install_id: install_id.clone(),
            app_id: app_id.to_string(),
            app_version: package.version,
            target: target.to_string(),
            principal: principal.to_string(),
            config,
            state: InstallState::Bound,
            bindings: None,
        };

        if discovery.solutions.is_empty() {
            // Name the variables the model could not satisfy.
            let mut diagnostics = Vec::new();
            for (i, var) in query.variables.iter().enumerate() {
                if plan.graphs[0].candidates[i].is_empty() {
                    diagnostics.push(format!(
                        "variable `{}` matched no entities in the published model",
                        var.name
                    ));
                }
            }
            if diagnostics.is_empty() {
                diagnostics.push(
                    "variables matched entities but no assignment satisfied the path constraints"
                        .to_string(),
                );
            }
            installation.state = InstallState::FailedDiscovery { diagnostics };
            self.apps.put_installation(installation.clone());
            self.persist_apps()?;
            return Ok(installation);
        }

        let procedure = self
            .apps
            .procedure(&package.entrypoint)
            .ok_or_else(|| AppError::UnknownEntrypoint(package.entrypoint.clone()))?;
        let target_is_site = self.directory.site(target).is_some();
        let target_label = self
            .directory
            .site(target)
            .map(|s| s.display_name)
            .or_else(|| self.directory.building(target).map(|b| b.display_name))
            .unwrap_or_default();
        let stream_exists = |id: &str| self.timeseries.exists(id);
        let ctx = BindContext {
            graph_id: &graph_id,
            graph: &graph,
            ontology: &self.ontology,
            target,
            target_is_site,
            target_label: &target_label,
            discovery: &discovery,
            config: &installation.config,
            stream_exists: &stream_exists,
        };
        match procedure.bind(&ctx) {
            Ok(bindings) => {
                // Bindings may only reference streams the installer reads.
                let mut denied = Vec::new();
                for stream in &bindings.streams {
                    if let Some(meta) = self.timeseries.meta(stream) {
                        if self.stream_access(&meta, principal, Role::Reader).is_err() {
                            denied.push(stream.clone());
                        }
                    }
                }
                if !denied.is_empty() {
                    return Err(PlatformError::StreamAccessDenied(denied));
                }
                installation.bindings = Some(bindings);
            }
            Err(err) => {
                installation.state = InstallState::FailedDiscovery {
                    diagnostics: vec![err.to_string()],
                };
            }
        }
        self.apps.put_installation(installation.clone());
        self.persist_apps()?;
        Ok(installation)
    }

    /// Executes the installed app's entrypoint inside the sandbox. A
    /// recorded violation aborts the run and is preserved in the record.
    pub fn run_app(
        &self,
        install_id: &str,
        as_of: i64,
        principal: &str,
    ) -> Result<RunRecord, PlatformError> {
        let installation = self
            .apps
            .installation(install_id)
            .map_err(|_| PlatformError::NotFound(install_id.to_string()))?;
        let scope = self
            .directory
            .target_scope(&installation.target)
            .ok_or_else(|| PlatformError::NotFound(install_id.to_string()))?;
        if !self.directory.check_access(principal, &scope, Role::Reader) {
            return Err(PlatformError::NotFound(install_id.to_string()));
        }
        let Some(bindings) = &installation.bindings else {
            return Err(AppError::NotBound(install_id.to_string()).into());
        };
        if installation.state != InstallState::Bound {
            return Err(AppError::NotBound(install_id.to_string()).into());
        }
        let package = self
            .apps
            .package(&installation.app_id, installation.app_version)?;
        let procedure = self
            .apps
            .procedure(&package.entrypoint)
            .ok_or_else(|| AppError::UnknownEntrypoint(package.entrypoint.clone()))?;

        let _guard = self.apps.begin_run(install_id)?;
        let ctx = SandboxContext::new(
            install_id,
            as_of,
            bindings,
            &installation.config,
            &self.timeseries,
        )
        .with_wall_limit(self.limits.max_wall);
        let outcome = procedure.run(&ctx);
        let violations = ctx.violations();
        let outputs = ctx.outputs();
        let record = RunRecord {
            install_id: install_id.to_string(),
            run_seq: self.apps.next_run_seq(install_id),
            as_of,
            state: if !violations.is_empty() {
                RunState::SandboxViolation
            } else if outcome.is_ok() {
                RunState::Completed
            } else {
                RunState::Failed
            },
            result: outcome.as_ref().ok().cloned().filter(|_| violations.is_empty()),
            error: match &outcome {
                Err(e) => Some(e.to_string()),
                Ok(_) if !violations.is_empty() => {
                    Some("run aborted: sandbox violations recorded".to_string())
                }
                Ok(_) => None,
            },
            violations,
            outputs,
        };
        self.apps.record_run(record.clone());
        self.persist_apps()?;
        for stream in &record.outputs {
            self.persist_stream_log(stream)?;
        }
        self.persist_stream_index()?;
        Ok(record)
    }

    pub fn run_result(
        &self,
        install_id: &str,
        principal: &str,
    ) -> Result<RunRecord, PlatformError> {
        let installation = self
            .apps
            .installation(install_id)
            .map_err(|_| PlatformError::NotFound(install_id.to_string()))?;
        let scope = self
            .directory
            .target_scope(&installation.target)
            .ok_or_else(|| PlatformError::NotFound(install_id.to_string()))?;
        if !self.directory.check_access(principal, &scope, Role::Reader) {
            return Err(PlatformError::NotFound(install_id.to_string()));
        }
        self.apps
            .latest_run(install_id)
            .ok_or_else(|| PlatformError::NotFound(format!("runs of `{install_id}`")))
    }

    // -- persistence ----------------------------------------------------------------

    /// Opens a platform rooted at a data directory, loading any persisted
    /// state.
    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self, PlatformError> {
        let data_dir = data_dir.into();
        fs::create_dir_all(&data_dir).map_err(io_err)?;
        let mut platform = Platform::new();
        platform.data_dir = Some(data_dir.clone());

        let directory_file = data_dir.join("directory.json");
        if directory_file.exists() {
            let text = fs::read_to_string(&directory_file).map_err(io_err)?;
            platform.directory.load_json(&text).map_err(|e| PlatformError::Io(e.to_string()))?;
        }
        let queries_file = data_dir.join("queries.json");
        if queries_file.exists() {
            let text = fs::read_to_string(&queries_file).map_err(io_err)?;
            platform.queries.load_json(&text).map_err(PlatformError::Io)?;
        }
        let apps_file = data_dir.join("apps.json");
        if apps_file.exists() {
            let text = fs::read_to_string(&apps_file).map_err(io_err)?;
            platform.apps.load_json(&text).map_err(PlatformError::Io)?;
        }

        let graphs_index = data_dir.join("graphs").join("index.json");
        if graphs_index.exists() {
            let text = fs::read_to_string(&graphs_index).map_err(io_err)?;
            let index: Vec<GraphIndexEntry> =
                serde_json::from_str(&text).map_err(|e| PlatformError::Io(e.to_string()))?;
            for entry in index {
                let path = data_dir
                    .join("graphs")
                    .join(format!("{}.tsv", sanitize(entry.graph_id.as_str())));
                let snapshot = fs::read_to_string(&path).map_err(io_err)?;
                let triples =
                    crate::graph::read_snapshot(&snapshot).map_err(PlatformError::Io)?;
                platform.graphs.create_graph(entry.graph_id.clone())?;
                platform.graphs.assert_triples(&entry.graph_id, &triples)?;
                if entry.frozen {
                    platform.graphs.freeze(&entry.graph_id)?;
                }
            }
        }

        let streams_index = data_dir.join("streams").join("index.json");
        if streams_index.exists() {
            let text = fs::read_to_string(&streams_index).map_err(io_err)?;
            let metas: Vec<StreamMeta> =
                serde_json::from_str(&text).map_err(|e| PlatformError::Io(e.to_string()))?;
            for meta in metas {
                let id = meta.stream_id.clone();
                platform.timeseries.create_stream(meta)?;
                let log = data_dir.join("streams").join(format!("{}.log", sanitize(&id)));
                if log.exists() {
                    let text = fs::read_to_string(&log).map_err(io_err)?;
                    platform.timeseries.load_log(&id, &text)?;
                }
            }
        }

        Ok(platform)
    }

    /// Flushes all state to the data directory (no-op without one).
    pub fn save(&self) -> Result<(), PlatformError> {
        self.persist_directory()?;
        self.persist_graphs()?;
        self.persist_stream_index()?;
        for id in self.timeseries.stream_ids() {
            self.persist_stream_log(&id)?;
        }
        self.persist_queries()?;
        self.persist_apps()?;
        Ok(())
    }

    fn persist_directory(&self) -> Result<(), PlatformError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        fs::write(dir.join("directory.json"), self.directory.to_json()).map_err(io_err)
    }

    pub(crate) fn persist_queries(&self) -> Result<(), PlatformError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        fs::write(dir.join("queries.json"), self.queries.to_json()).map_err(io_err)
    }

    fn persist_apps(&self) -> Result<(), PlatformError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        fs::write(dir.join("apps.json"), self.apps.to_json()).map_err(io_err)
    }

    fn persist_graphs(&self) -> Result<(), PlatformError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        let graphs_dir = dir.join("graphs");
        fs::create_dir_all(&graphs_dir).map_err(io_err)?;
        let mut index = Vec::new();
        for graph_id in self.graphs.graph_ids() {
            let graph = self.graphs.snapshot(&graph_id)?;
            let frozen = self.graphs.is_frozen(&graph_id);
            fs::write(
                graphs_dir.join(format!("{}.tsv", sanitize(graph_id.as_str()))),
                crate::graph::write_snapshot(&graph),
            )
            .map_err(io_err)?;
            index.push(GraphIndexEntry { graph_id, frozen });
        }
        fs::write(
            graphs_dir.join("index.json"),
            serde_json::to_string_pretty(&index).unwrap(),
        )
        .map_err(io_err)
    }

    fn persist_stream_index(&self) -> Result<(), PlatformError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        let streams_dir = dir.join("streams");
        fs::create_dir_all(&streams_dir).map_err(io_err)?;
        let metas: Vec<StreamMeta> = self
            .timeseries
            .stream_ids()
            .into_iter()
            .filter_map(|id| self.timeseries.meta(&id))
            .collect();
        fs::write(
            streams_dir.join("index.json"),
            serde_json::to_string_pretty(&metas).unwrap(),
        )
        .map_err(io_err)
    }

    fn persist_stream_log(&self, stream_id: &str) -> Result<(), PlatformError> {
        let Some(dir) = &self.data_dir else { return Ok(()) };
        let streams_dir = dir.join("streams");
        fs::create_dir_all(&streams_dir).map_err(io_err)?;
        let log = self.timeseries.dump_log(stream_id)?;
        fs::write(
            streams_dir.join(format!("{}.log", sanitize(stream_id))),
            log,
        )
        .map_err(io_err)
    }
}

impl Default for Platform {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct GraphIndexEntry {
    graph_id: Iri,
    frozen: bool,
}

fn io_err(e: std::io::Error) -> PlatformError {
    PlatformError::Io(e.to_string())
}

/// Filesystem-safe encoding of identifiers (ids contain `:` and `/`).
fn sanitize(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        match b {
            b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'-' | b'_' | b'.' => {
                out.push(b as char)
            }
            other => out.push_str(&format!("%{other:02X}")),
        }
    }
    out
}
