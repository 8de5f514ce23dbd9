//! Brickhouse: a self-contained semantic building data platform kernel.
//!
//! It stores Brick-style building models in named graphs, answers BRIQL
//! queries (a high-level domain query language compiled onto graph
//! patterns), ingests and health-checks time-series meter and sensor data,
//! and hosts re-deployable analytics applications, with whole-facility
//! (IPMVP Option C) measurement and verification as the reference app,
//! including automatic meter-hierarchy discovery.
//!
//! The crate is a library first: every capability is usable without the
//! HTTP service. See the `examples/` directory for one runnable example per
//! major capability, and the `brickhouse` binary for the service and its
//! command-line client.
//!
//! Module map:
//!
//! - [`rdf`]: IRIs, literals, triples, and the Turtle-subset parser.
//! - [`ontology`]: class hierarchy with tags and reciprocal relationships.
//! - [`graph`]: named-graph triple store with inverse materialization and
//!   cycle-safe transitive traversal.
//! - [`briql`]: query parsing, planning, evaluation, stored queries, and
//!   SPARQL text emission.
//! - [`directory`]: organisations/sites/buildings, model lifecycle, RBAC.
//! - [`timeseries`]: per-stream observation store with aggregation and
//!   completeness accounting.
//! - [`ingest`]: gateway JSON and NEM12 parsers, mapping, data health.
//! - [`mv`]: change-point baseline regression, savings estimation, meter
//!   discovery.
//! - [`apps`]: app packaging, install-time binding, sandboxed execution.
//! - [`platform`]: the assembled kernel with persistence.
//! - [`api`]: the HTTP service surface.

pub mod api;
pub mod apps;
pub mod briql;
pub mod directory;
pub mod graph;
pub mod ingest;
pub mod mv;
pub mod platform;
pub mod ontology;
pub mod rdf;
pub mod timeseries;

pub use ontology::Ontology;
pub use platform::{Platform, PlatformError, QueryRef};
pub use rdf::{Iri, Literal, Object, Triple};
