//! BRIQL: the high-level query language over building models.
//!
//! A query declares variables, each matching one building entity by type
//! (exact class, parent class, tags, or instance properties), and path
//! constraints requiring transitive relationship walks between variables.
//! Evaluation returns a list of entities (with requested metadata, notably
//! `pointinfo` — attached Points and their stream metadata) and a table of
//! solutions whose cells index into that list.

mod engine;
mod parse;
mod sparql;

pub use engine::{entity_matches_tags, evaluate, plan, plan_with, PlanStrategy, GraphPlan, Plan};
pub(crate) use engine::attached_points;
pub use parse::{parse_query, query_to_canonical_json};
pub use sparql::{check_sparql_well_formed, compile_to_sparql_text};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::RwLock;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::graph::GraphError;
use crate::ontology::OntologyError;
use crate::rdf::{Iri, Literal};

// ---------------------------------------------------------------------------
// Query AST
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueryMode {
    #[default]
    Normal,
    Describe,
}

/// How a variable's candidate entities are matched.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeMatcher {
    /// Exact reference to a class.
    Exact(String),
    /// The class or any of its subclasses.
    Isa(String),
    /// Classes whose tag set is a superset of these tags.
    Tags(BTreeSet<String>),
    /// Instance entity-property equality predicates.
    Properties(BTreeMap<String, Literal>),
}

/// Metadata attributes that can be fetched per variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fetch {
    Id,
    PointInfo,
    Properties,
    Label,
}

impl Fetch {
    pub fn name(&self) -> &'static str {
        match self {
            Fetch::Id => "id",
            Fetch::PointInfo => "pointinfo",
            Fetch::Properties => "properties",
            Fetch::Label => "label",
        }
    }
}

/// Filter over attached points, applied when `pointinfo` is fetched.
#[derive(Debug, Clone, PartialEq)]
pub enum PointFilter {
    Tags(BTreeSet<String>),
    Isa(String),
}

#[derive(Debug, Clone)]
pub struct VariableDecl {
    pub name: String,
    pub output: bool,
    pub matcher: TypeMatcher,
    pub fetch: BTreeSet<Fetch>,
    pub fetch_points: Vec<PointFilter>,
    pub default_binding: Option<Iri>,
}

/// One hop specification in a path: a relationship walked between `min` and
/// `max` times (`None` = unbounded).
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub property: String,
    pub min: u32,
    pub max: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct PathConstraint {
    pub from_ref: String,
    pub steps: Vec<PathStep>,
    pub to_ref: String,
}

#[derive(Debug, Clone)]
pub struct BriqlQuery {
    pub variables: Vec<VariableDecl>,
    pub paths: Vec<PathConstraint>,
    pub mode: QueryMode,
}

impl BriqlQuery {
    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

// ---------------------------------------------------------------------------
// Response
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PointInfo {
    pub id: Iri,
    pub class: Iri,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantity_kind: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntityRecord {
    pub id: Iri,
    /// Graph the entity came from (model attribution).
    pub model: Iri,
    pub class: Iri,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub properties: Option<BTreeMap<String, Literal>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointInfo>>,
}

/// Entity list plus solution table. Every cell indexes into `entities`,
/// only output variables appear as columns, and rows are deduplicated.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BriqlResponse {
    pub entities: Vec<EntityRecord>,
    pub solutions: Vec<BTreeMap<String, usize>>,
}

// ---------------------------------------------------------------------------
// Quality-of-service limits
// ---------------------------------------------------------------------------

/// Per-invocation resource ceilings. Exceeding either aborts evaluation
/// with [`BriqlError::ResourceLimit`].
#[derive(Debug, Clone, Copy)]
pub struct QueryLimits {
    pub max_bindings: u64,
    pub max_wall: Duration,
}

impl Default for QueryLimits {
    fn default() -> Self {
        QueryLimits {
            max_bindings: 1_000_000,
            max_wall: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Error)]
pub enum BriqlError {
    #[error("query document error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(&'static str),
    #[error("stored query `{id}` version {version} not found")]
    StoredQueryNotFound { id: String, version: u32 },
    #[error("argument `{0}` does not match any declared variable")]
    BadArgument(String),
}

impl BriqlError {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        BriqlError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Stored queries
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct StoredQuery {
    pub query_id: String,
    pub version: u32,
    /// Canonical JSON form (sorted keys, no insignificant whitespace).
    pub body: String,
    pub owner_org: Option<String>,
}

/// Registry of stored queries. Bodies are canonicalized at store time and
/// immutable afterwards; versions auto-increment per query id.
#[derive(Default)]
pub struct StoredQueryRegistry {
    queries: RwLock<BTreeMap<String, Vec<StoredQuery>>>,
}

impl StoredQueryRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and stores a query body; returns the assigned version.
    pub fn store(
        &self,
        query_id: &str,
        body: &BriqlQuery,
        owner_org: Option<String>,
    ) -> (String, u32) {
        let canonical = query_to_canonical_json(body);
        let mut queries = self.queries.write().unwrap();
        let versions = queries.entry(query_id.to_string()).or_default();
        let version = versions.last().map_or(1, |q| q.version + 1);
        versions.push(StoredQuery {
            query_id: query_id.to_string(),
            version,
            body: canonical,
            owner_org,
        });
        (query_id.to_string(), version)
    }

    /// The byte-identical canonical body stored under (id, version).
    pub fn get(&self, query_id: &str, version: u32) -> Result<StoredQuery, BriqlError> {
        self.queries
            .read()
            .unwrap()
            .get(query_id)
            .and_then(|vs| vs.iter().find(|q| q.version == version))
            .cloned()
            .ok_or(BriqlError::StoredQueryNotFound {
                id: query_id.to_string(),
                version,
            })
    }

    pub fn latest_version(&self, query_id: &str) -> Option<u32> {
        self.queries
            .read()
            .unwrap()
            .get(query_id)
            .and_then(|vs| vs.last())
            .map(|q| q.version)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&*self.queries.read().unwrap()).unwrap()
    }

    pub fn load_json(&self, text: &str) -> Result<(), String> {
        #[derive(serde::Deserialize)]
        struct Stored {
            query_id: String,
            version: u32,
            body: String,
            owner_org: Option<String>,
        }
        let parsed: BTreeMap<String, Vec<Stored>> =
            serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut queries = self.queries.write().unwrap();
        *queries = parsed
            .into_iter()
            .map(|(k, vs)| {
                (
                    k,
                    vs.into_iter()
                        .map(|s| StoredQuery {
                            query_id: s.query_id,
                            version: s.version,
                            body: s.body,
                            owner_org: s.owner_org,
                        })
                        .collect(),
                )
            })
            .collect();
        Ok(())
    }
}
