//! Multi-tenant meta-object registry (Organisation → Site → Building),
//! semantic-model lifecycle (draft, validate, publish), and role-based
//! access control gating every read and write.
//!
//! Access is deny-by-default: a principal may act iff it holds a grant at
//! the object's scope or an enclosing scope whose role meets or exceeds the
//! needed role. Organisation grants cover the organisation's sites and
//! buildings; a platform-scope grant covers everything.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, GraphStore, NamedGraph};
use crate::ontology::Ontology;
use crate::rdf::{ns, parse_turtle, Iri, Object, RdfError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Reader,
    Modeler,
    Admin,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Reader => "reader",
            Role::Modeler => "modeler",
            Role::Admin => "admin",
        })
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reader" => Ok(Role::Reader),
            "modeler" => Ok(Role::Modeler),
            "admin" => Ok(Role::Admin),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// Where a grant applies. Written as `platform`, `org:<id>`, `site:<id>`,
/// or `building:<id>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Platform,
    Org(String),
    Site(String),
    Building(String),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Platform => f.write_str("platform"),
            Scope::Org(id) => write!(f, "org:{id}"),
            Scope::Site(id) => write!(f, "site:{id}"),
            Scope::Building(id) => write!(f, "building:{id}"),
        }
    }
}

impl FromStr for Scope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "platform" {
            return Ok(Scope::Platform);
        }
        match s.split_once(':') {
            Some(("org", id)) => Ok(Scope::Org(id.to_string())),
            Some(("site", id)) => Ok(Scope::Site(id.to_string())),
            Some(("building", id)) => Ok(Scope::Building(id.to_string())),
            _ => Err(format!("unknown scope `{s}`")),
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grant {
    pub scope: Scope,
    pub role: Role,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Organisation {
    pub org_id: String,
    pub display_name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Site {
    pub site_id: String,
    pub org: String,
    pub display_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub address: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cadastral_ref: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Building {
    pub building_id: String,
    pub site: String,
    pub display_name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelState {
    Draft,
    Published,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelVersion {
    pub target: String,
    pub version: u32,
    pub state: ModelState,
    pub graph_id: Iri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entity: Option<Iri>,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .count()
    }

    pub fn warning_count(&self) -> usize {
        self.findings.len() - self.error_count()
    }
}

#[derive(Debug, Error)]
pub enum DirectoryError {
    #[error("access denied")]
    Denied,
    #[error("`{0}` not found")]
    NotFound(String),
    #[error("duplicate display name `{0}` within parent")]
    DuplicateName(String),
    #[error("invalid geolocation: {0}")]
    BadGeolocation(String),
    #[error("model document parse failure: {0}")]
    Parse(#[from] RdfError),
    #[error("model has outstanding validation errors ({0})")]
    ValidationErrors(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct DirectoryState {
    orgs: BTreeMap<String, Organisation>,
    sites: BTreeMap<String, Site>,
    buildings: BTreeMap<String, Building>,
    /// Model versions per target (site or building id), ascending version.
    models: BTreeMap<String, Vec<ModelVersion>>,
    /// The active published version per target.
    active: BTreeMap<String, u32>,
    grants: BTreeMap<String, Vec<Grant>>,
    next_org: u64,
    next_site: u64,
    next_building: u64,
}

/// The registry. Mutations are serialized; reads are snapshot-consistent.
#[derive(Default)]
pub struct Directory {
    state: RwLock<DirectoryState>,
}

impl Directory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&*self.state.read().unwrap()).unwrap()
    }

    pub fn load_json(&self, text: &str) -> Result<(), serde_json::Error> {
        let state: DirectoryState = serde_json::from_str(text)?;
        *self.state.write().unwrap() = state;
        Ok(())
    }

    // -- grants -------------------------------------------------------------

    pub fn add_grant(&self, principal: &str, scope: Scope, role: Role) {
        let mut st = self.state.write().unwrap();
        let grants = st.grants.entry(principal.to_string()).or_default();
        if !grants.iter().any(|g| g.scope == scope && g.role == role) {
            grants.push(Grant { scope, role });
        }
    }

    pub fn grants_of(&self, principal: &str) -> Vec<Grant> {
        self.state
            .read()
            .unwrap()
            .grants
            .get(principal)
            .cloned()
            .unwrap_or_default()
    }

    /// Enclosing scope chain of an object scope, innermost first. Unknown
    /// ids produce the partial chain they allow (denied by default).
    fn scope_chain(st: &DirectoryState, scope: &Scope) -> Vec<Scope> {
        let mut chain = vec![scope.clone()];
        match scope {
            Scope::Building(b) => {
                if let Some(building) = st.buildings.get(b) {
                    chain.push(Scope::Site(building.site.clone()));
                    if let Some(site) = st.sites.get(&building.site) {
                        chain.push(Scope::Org(site.org.clone()));
                    }
                }
            }
            Scope::Site(s) => {
                if let Some(site) = st.sites.get(s) {
                    chain.push(Scope::Org(site.org.clone()));
                }
            }
            _ => {}
        }
        if !matches!(scope, Scope::Platform) {
            chain.push(Scope::Platform);
        }
        chain
    }

    /// Deny by default; allow iff a grant at the object's scope or an
    /// enclosing scope meets or exceeds the needed role.
    pub fn check_access(&self, principal: &str, scope: &Scope, needed: Role) -> bool {
        let st = self.state.read().unwrap();
        let chain = Self::scope_chain(&st, scope);
        st.grants.get(principal).is_some_and(|grants| {
            grants
                .iter()
                .any(|g| g.role >= needed && chain.contains(&g.scope))
        })
    }

    fn require(&self, principal: &str, scope: &Scope, needed: Role) -> Result<(), DirectoryError> {
        if self.check_access(principal, scope, needed) {
            Ok(())
        } else {
            Err(DirectoryError::Denied)
        }
    }

    // -- meta-objects ---------------------------------------------------------

    pub fn create_org(&self, display_name: &str, principal: &str) -> Result<String, DirectoryError> {
        self.require(principal, &Scope::Platform, Role::Admin)?;
        let mut st = self.state.write().unwrap();
        if st.orgs.values().any(|o| o.display_name == display_name) {
            return Err(DirectoryError::DuplicateName(display_name.to_string()));
        }
        st.next_org += 1;
        let org_id = format!("org-{}", st.next_org);
        st.orgs.insert(
            org_id.clone(),
            Organisation {
                org_id: org_id.clone(),
                display_name: display_name.to_string(),
            },
        );
        // The creator administers the new organisation.
        st.grants
            .entry(principal.to_string())
            .or_default()
            .push(Grant {
                scope: Scope::Org(org_id.clone()),
                role: Role::Admin,
            });
        Ok(org_id)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn create_site(
        &self,
        org: &str,
        display_name: &str,
        latitude: f64,
        longitude: f64,
        address: &str,
        cadastral_ref: Option<String>,
        principal: &str,
    ) -> Result<String, DirectoryError> {
        self.require(principal, &Scope::Org(org.to_string()), Role::Admin)?;
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(DirectoryError::BadGeolocation(format!(
                "latitude {latitude} out of [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(DirectoryError::BadGeolocation(format!(
                "longitude {longitude} out of [-180, 180]"
            )));
        }
        let mut st = self.state.write().unwrap();
        if !st.orgs.contains_key(org) {
            return Err(DirectoryError::NotFound(org.to_string()));
        }
        if st
            .sites
            .values()
            .any(|s| s.org == org && s.display_name == display_name)
        {
            return Err(DirectoryError::DuplicateName(display_name.to_string()));
        }
        st.next_site += 1;
        let site_id = format!("site-{}", st.next_site);
        st.sites.insert(
            site_id.clone(),
            Site {
                site_id: site_id.clone(),
                org: org.to_string(),
                display_name: display_name.to_string(),
                latitude,
                longitude,
                address: address.to_string(),
                cadastral_ref,
            },
        );
        Ok(site_id)
    }

    pub fn create_building(
        &self,
        site: &str,
        display_name: &str,
        principal: &str,
    ) -> Result<String, DirectoryError> {
        self.require(principal, &Scope::Site(site.to_string()), Role::Admin)?;
        let mut st = self.state.write().unwrap();
        if !st.sites.contains_key(site) {
            return Err(DirectoryError::NotFound(site.to_string()));
        }
        if st
            .buildings
            .values()
            .any(|b| b.site == site && b.display_name == display_name)
        {
            return Err(DirectoryError::DuplicateName(display_name.to_string()));
        }
        st.next_building += 1;
        let building_id = format!("building-{}", st.next_building);
        st.buildings.insert(
            building_id.clone(),
            Building {
                building_id: building_id.clone(),
                site: site.to_string(),
                display_name: display_name.to_string(),
            },
        );
        Ok(building_id)
    }

    pub fn org(&self, id: &str) -> Option<Organisation> {
        self.state.read().unwrap().orgs.get(id).cloned()
    }

    pub fn site(&self, id: &str) -> Option<Site> {
        self.state.read().unwrap().sites.get(id).cloned()
    }

    pub fn building(&self, id: &str) -> Option<Building> {
        self.state.read().unwrap().buildings.get(id).cloned()
    }

    pub fn orgs(&self) -> Vec<Organisation> {
        self.state.read().unwrap().orgs.values().cloned().collect()
    }

    pub fn sites(&self) -> Vec<Site> {
        self.state.read().unwrap().sites.values().cloned().collect()
    }

    pub fn buildings(&self) -> Vec<Building> {
        self.state.read().unwrap().buildings.values().cloned().collect()
    }

    /// The access-control scope of a site or building target id.
    pub fn target_scope(&self, target: &str) -> Option<Scope> {
        let st = self.state.read().unwrap();
        if st.sites.contains_key(target) {
            Some(Scope::Site(target.to_string()))
        } else if st.buildings.contains_key(target) {
            Some(Scope::Building(target.to_string()))
        } else {
            None
        }
    }

    // -- model lifecycle ------------------------------------------------------

    /// Parses a model document and creates a new draft version for the
    /// target, populating a fresh named graph.
    pub fn upload_draft(
        &self,
        target: &str,
        document: &str,
        principal: &str,
        graphs: &GraphStore,
    ) -> Result<ModelVersion, DirectoryError> {
        // Unknown targets deny like forbidden ones: no existence oracle.
        let scope = self.target_scope(target).ok_or(DirectoryError::Denied)?;
        self.require(principal, &scope, Role::Modeler)?;
        let triples = parse_turtle(document)?;

        let mut st = self.state.write().unwrap();
        let versions = st.models.entry(target.to_string()).or_default();
        let version = versions.last().map_or(1, |v| v.version + 1);
        let graph_id = Iri::new(format!("model:{target}:v{version}")).unwrap();
        graphs.create_graph(graph_id.clone())?;
        graphs.assert_triples(&graph_id, &triples)?;
        let mv = ModelVersion {
            target: target.to_string(),
            version,
            state: ModelState::Draft,
            graph_id,
        };
        versions.push(mv.clone());
        Ok(mv)
    }

    pub fn model_versions(&self, target: &str) -> Vec<ModelVersion> {
        self.state
            .read()
            .unwrap()
            .models
            .get(target)
            .cloned()
            .unwrap_or_default()
    }

    pub fn model_version(&self, target: &str, version: u32) -> Option<ModelVersion> {
        self.model_versions(target)
            .into_iter()
            .find(|v| v.version == version)
    }

    /// The graph id of the target's active published model, if any.
    pub fn published_graph(&self, target: &str) -> Option<Iri> {
        let st = self.state.read().unwrap();
        let version = *st.active.get(target)?;
        st.models
            .get(target)?
            .iter()
            .find(|v| v.version == version)
            .map(|v| v.graph_id.clone())
    }

    /// Runs the validation rule set over a model version's graph.
    pub fn validate_model(
        &self,
        target: &str,
        version: u32,
        graphs: &GraphStore,
        stream_exists: &dyn Fn(&str) -> bool,
    ) -> Result<ValidationReport, DirectoryError> {
        let mv = self
            .model_version(target, version)
            .ok_or_else(|| DirectoryError::NotFound(format!("{target} v{version}")))?;
        let graph = graphs.snapshot(&mv.graph_id)?;
        Ok(validate_graph(&graph, graphs.ontology(), stream_exists))
    }

    /// Publishes a validated draft: the graph is frozen and the version
    /// becomes the target's active model atomically. The previous published
    /// version stays readable by version number.
    pub fn publish_model(
        &self,
        target: &str,
        version: u32,
        principal: &str,
        graphs: &GraphStore,
        stream_exists: &dyn Fn(&str) -> bool,
    ) -> Result<ModelVersion, DirectoryError> {
        let scope = self.target_scope(target).ok_or(DirectoryError::Denied)?;
        self.require(principal, &scope, Role::Modeler)?;
        let report = self.validate_model(target, version, graphs, stream_exists)?;
        if report.error_count() > 0 {
            return Err(DirectoryError::ValidationErrors(report.error_count()));
        }

        let mut st = self.state.write().unwrap();
        let versions = st
            .models
            .get_mut(target)
            .ok_or_else(|| DirectoryError::NotFound(target.to_string()))?;
        let mv = versions
            .iter_mut()
            .find(|v| v.version == version)
            .ok_or_else(|| DirectoryError::NotFound(format!("{target} v{version}")))?;
        graphs.freeze(&mv.graph_id)?;
        mv.state = ModelState::Published;
        let mv = mv.clone();
        st.active.insert(target.to_string(), version);
        Ok(mv)
    }
}

// ---------------------------------------------------------------------------
// Validation rules
// ---------------------------------------------------------------------------

/// The rule set applied before publish. Errors block publishing; warnings
/// do not. The set is a documented minimum — extend here.
pub fn validate_graph(
    graph: &NamedGraph,
    ontology: &Ontology,
    stream_exists: &dyn Fn(&str) -> bool,
) -> ValidationReport {
    let mut findings = Vec::new();
    let rdf_type = ns::rdf_type();
    let rdfs_label = ns::rdfs_label();
    let point_class = ns::brick("Point");
    let is_point_of = ns::brick("isPointOf");

    // Every entity carries a known ontology class.
    for entity in graph.entities() {
        let types = graph.types_of(&entity);
        if types.is_empty() {
            findings.push(Finding {
                severity: Severity::Error,
                code: "untyped-entity".into(),
                entity: Some(entity.clone()),
                message: "entity has no rdf:type".into(),
            });
            continue;
        }
        for class in &types {
            if ontology.class(class).is_none() {
                findings.push(Finding {
                    severity: Severity::Error,
                    code: "unknown-class".into(),
                    entity: Some(entity.clone()),
                    message: format!("entity typed with unknown class `{class}`"),
                });
            }
        }
    }

    // Every predicate is a relationship, rdf:type, or metadata (label or a
    // literal-valued entity property).
    for t in graph.triples() {
        match &t.object {
            Object::Iri(obj) => {
                if t.predicate == rdf_type {
                    continue;
                }
                match ontology.relation(&t.predicate) {
                    Some(def) => {
                        let reciprocal =
                            crate::rdf::Triple::new(obj.clone(), def.inverse.clone(), t.subject.clone());
                        if !graph.contains(&reciprocal) {
                            findings.push(Finding {
                                severity: Severity::Error,
                                code: "missing-reciprocal".into(),
                                entity: Some(t.subject.clone()),
                                message: format!(
                                    "edge `{}` lacks its reciprocal `{}`",
                                    t.predicate.local_name(),
                                    def.inverse.local_name()
                                ),
                            });
                        }
                    }
                    None => findings.push(Finding {
                        severity: Severity::Error,
                        code: "unknown-predicate".into(),
                        entity: Some(t.subject.clone()),
                        message: format!("predicate `{}` has no relationship definition", t.predicate),
                    }),
                }
            }
            Object::Literal(_) => {
                if t.predicate != rdfs_label && ontology.relation(&t.predicate).is_some() {
                    findings.push(Finding {
                        severity: Severity::Error,
                        code: "relation-literal-object".into(),
                        entity: Some(t.subject.clone()),
                        message: format!(
                            "relationship `{}` used with a literal object",
                            t.predicate.local_name()
                        ),
                    });
                }
            }
        }
    }

    // Point entities attach to at least one non-point entity, and their
    // stream references resolve.
    for entity in graph.entities() {
        let types = graph.types_of(&entity);
        let is_point = types
            .iter()
            .any(|c| ontology.is_subclass_of(c, &point_class));
        if !is_point {
            continue;
        }
        let hosts = graph.successors(&entity, &is_point_of);
        let attached = hosts.iter().any(|h| {
            graph
                .types_of(h)
                .iter()
                .any(|c| !ontology.is_subclass_of(c, &point_class))
        });
        if !attached {
            findings.push(Finding {
                severity: Severity::Warning,
                code: "dangling-point".into(),
                entity: Some(entity.clone()),
                message: "point is not attached to any non-point entity via isPointOf".into(),
            });
        }
        if let Some(stream_ref) = graph.property(&entity, "streamRef") {
            if let Some(id) = stream_ref.as_str() {
                if !stream_exists(id) {
                    findings.push(Finding {
                        severity: Severity::Warning,
                        code: "unresolved-stream".into(),
                        entity: Some(entity.clone()),
                        message: format!("stream reference `{id}` does not resolve"),
                    });
                }
            }
        }
    }

    ValidationReport { findings }
}
