//! Ontology-aware triple store: named graphs of subject–predicate–object
//! edges with reciprocal relationship materialization and cycle-safe
//! transitive traversal.
//!
//! Writes to a graph are serialized and atomic at batch granularity; readers
//! take an `Arc` snapshot of a graph and see a consistent state for the
//! whole read, concurrent with later writes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::ontology::{Ontology, OntologyError};
use crate::rdf::{ns, Iri, Literal, Object, Triple};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph `{0}` not found")]
    NotFound(Iri),
    #[error("graph `{0}` already exists")]
    AlreadyExists(Iri),
    #[error("graph `{0}` is published and immutable")]
    Immutable(Iri),
    #[error("relation `{0}` has no relationship definition")]
    UnknownRelation(Iri),
    #[error("min_hops must be at least 1")]
    BadHopBounds,
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

/// An immutable view of one named graph's triples.
#[derive(Debug, Clone, Default)]
pub struct NamedGraph {
    pub graph_id: Option<Iri>,
    triples: BTreeSet<Triple>,
}

impl NamedGraph {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Pattern scan: `None` positions are wildcards.
    pub fn scan<'a>(
        &'a self,
        subject: Option<&'a Iri>,
        predicate: Option<&'a Iri>,
        object: Option<&'a Object>,
    ) -> impl Iterator<Item = &'a Triple> {
        self.triples.iter().filter(move |t| {
            subject.is_none_or(|s| &t.subject == s)
                && predicate.is_none_or(|p| &t.predicate == p)
                && object.is_none_or(|o| &t.object == o)
        })
    }

    /// All `rdf:type` classes of an entity.
    pub fn types_of(&self, entity: &Iri) -> BTreeSet<Iri> {
        let rdf_type = ns::rdf_type();
        self.scan(Some(entity), Some(&rdf_type), None)
            .filter_map(|t| t.object.iri().cloned())
            .collect()
    }

    /// Every node that appears in subject position or as the IRI object of
    /// a non-`rdf:type` triple.
    pub fn entities(&self) -> BTreeSet<Iri> {
        let rdf_type = ns::rdf_type();
        let mut out = BTreeSet::new();
        for t in &self.triples {
            out.insert(t.subject.clone());
            if t.predicate != rdf_type {
                if let Object::Iri(o) = &t.object {
                    out.insert(o.clone());
                }
            }
        }
        out
    }

    /// Entity properties: literal-valued triples keyed by the predicate's
    /// local name, labels excluded (they have their own accessor). Keys are
    /// unique per entity (writes upsert).
    pub fn properties_of(&self, entity: &Iri) -> BTreeMap<String, Literal> {
        let label = ns::rdfs_label();
        self.scan(Some(entity), None, None)
            .filter(|t| t.predicate != label)
            .filter_map(|t| {
                t.object
                    .literal()
                    .map(|l| (t.predicate.local_name().to_string(), l.clone()))
            })
            .collect()
    }

    pub fn property(&self, entity: &Iri, key: &str) -> Option<Literal> {
        self.properties_of(entity).remove(key)
    }

    pub fn label_of(&self, entity: &Iri) -> Option<String> {
        let label = ns::rdfs_label();
        let found = self
            .scan(Some(entity), Some(&label), None)
            .find_map(|t| t.object.literal().and_then(|l| l.as_str()).map(str::to_string));
        found
    }

    /// Objects of `entity --relation--> ?`.
    pub fn successors(&self, entity: &Iri, relation: &Iri) -> BTreeSet<Iri> {
        self.scan(Some(entity), Some(relation), None)
            .filter_map(|t| t.object.iri().cloned())
            .collect()
    }

    /// Adjacency map of one relation over the whole graph.
    pub fn adjacency(&self, relation: &Iri) -> BTreeMap<Iri, BTreeSet<Iri>> {
        let mut adj: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for t in self.scan(None, Some(relation), None) {
            if let Object::Iri(o) = &t.object {
                adj.entry(t.subject.clone()).or_default().insert(o.clone());
            }
        }
        adj
    }

    /// Nodes reachable from `start` by a walk of `relation` edges whose
    /// length lies in `[min_hops, max_hops]` (`None` = unbounded).
    ///
    /// Walk lengths beyond `min_hops + |V|` add no new nodes (any longer
    /// walk can shed cycles into that range), so the stepping is capped
    /// there and terminates on cyclic graphs within `|V|·|E|` edge visits.
    pub fn reach(
        &self,
        start: &Iri,
        relation: &Iri,
        min_hops: u32,
        max_hops: Option<u32>,
    ) -> BTreeSet<Iri> {
        let adj = self.adjacency(relation);
        reach_over(&adj, std::iter::once(start.clone()), min_hops, max_hops)
    }
}

/// Frontier stepping over an adjacency map from a set of start nodes.
pub(crate) fn reach_over(
    adj: &BTreeMap<Iri, BTreeSet<Iri>>,
    starts: impl IntoIterator<Item = Iri>,
    min_hops: u32,
    max_hops: Option<u32>,
) -> BTreeSet<Iri> {
    let mut node_count: BTreeSet<&Iri> = BTreeSet::new();
    for (s, os) in adj {
        node_count.insert(s);
        node_count.extend(os.iter());
    }
    let cap = min_hops.saturating_add(node_count.len() as u32 + 1);
    let last = max_hops.map_or(cap, |m| m.min(cap));

    let mut frontier: BTreeSet<Iri> = starts.into_iter().collect();
    let mut out = BTreeSet::new();
    for k in 1..=last {
        let mut next = BTreeSet::new();
        for node in &frontier {
            if let Some(succ) = adj.get(node) {
                next.extend(succ.iter().cloned());
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
        if k >= min_hops {
            out.extend(frontier.iter().cloned());
        }
    }
    out
}

struct GraphSlot {
    data: Arc<NamedGraph>,
    writable: bool,
}

/// The store: named graphs keyed by graph id, sharing one ontology for
/// reciprocal materialization and class lookups.
pub struct GraphStore {
    ontology: Arc<Ontology>,
    graphs: RwLock<BTreeMap<Iri, GraphSlot>>,
}

impl GraphStore {
    pub fn new(ontology: Arc<Ontology>) -> Self {
        GraphStore {
            ontology,
            graphs: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn ontology(&self) -> &Arc<Ontology> {
        &self.ontology
    }

    pub fn create_graph(&self, graph_id: Iri) -> Result<(), GraphError> {
        let mut graphs = self.graphs.write().unwrap();
        if graphs.contains_key(&graph_id) {
            return Err(GraphError::AlreadyExists(graph_id));
        }
        graphs.insert(
            graph_id.clone(),
            GraphSlot {
                data: Arc::new(NamedGraph {
                    graph_id: Some(graph_id),
                    triples: BTreeSet::new(),
                }),
                writable: true,
            },
        );
        Ok(())
    }

    pub fn graph_ids(&self) -> Vec<Iri> {
        self.graphs.read().unwrap().keys().cloned().collect()
    }

    pub fn exists(&self, graph_id: &Iri) -> bool {
        self.graphs.read().unwrap().contains_key(graph_id)
    }

    /// A consistent snapshot of one graph for the duration of a read.
    pub fn snapshot(&self, graph_id: &Iri) -> Result<Arc<NamedGraph>, GraphError> {
        self.graphs
            .read()
            .unwrap()
            .get(graph_id)
            .map(|s| s.data.clone())
            .ok_or_else(|| GraphError::NotFound(graph_id.clone()))
    }

    pub fn is_frozen(&self, graph_id: &Iri) -> bool {
        self.graphs
            .read()
            .unwrap()
            .get(graph_id)
            .is_some_and(|s| !s.writable)
    }

    /// Marks a graph immutable (published model versions).
    pub fn freeze(&self, graph_id: &Iri) -> Result<(), GraphError> {
        let mut graphs = self.graphs.write().unwrap();
        let slot = graphs
            .get_mut(graph_id)
            .ok_or_else(|| GraphError::NotFound(graph_id.clone()))?;
        slot.writable = false;
        Ok(())
    }

    /// Inserts a batch of triples. For any predicate with a relationship
    /// definition the inverse triple is materialized automatically.
    /// Literal-valued triples upsert per (subject, predicate) so entity
    /// property keys stay unique. Returns the number of new triples,
    /// materialized inverses included.
    pub fn assert_triples(
        &self,
        graph_id: &Iri,
        triples: &[Triple],
    ) -> Result<usize, GraphError> {
        let mut graphs = self.graphs.write().unwrap();
        let slot = graphs
            .get_mut(graph_id)
            .ok_or_else(|| GraphError::NotFound(graph_id.clone()))?;
        if !slot.writable {
            return Err(GraphError::Immutable(graph_id.clone()));
        }

        let mut next = (*slot.data).clone();
        let mut added = 0usize;
        for t in triples {
            added += insert_one(&mut next.triples, t);
            if let (Some(def), Object::Iri(obj)) =
                (self.ontology.relation(&t.predicate), &t.object)
            {
                let inverse = Triple::new(obj.clone(), def.inverse.clone(), t.subject.clone());
                added += insert_one(&mut next.triples, &inverse);
            }
        }
        slot.data = Arc::new(next);
        Ok(added)
    }

    /// Entities whose `rdf:type` is the class (exact) or any subclass of it.
    pub fn entities_of_type(
        &self,
        graph_id: &Iri,
        class_iri: &Iri,
        include_subclasses: bool,
    ) -> Result<BTreeSet<Iri>, GraphError> {
        let graph = self.snapshot(graph_id)?;
        let classes = if include_subclasses {
            self.ontology.subclasses_of(class_iri)?
        } else {
            if self.ontology.class(class_iri).is_none() {
                return Err(OntologyError::UnknownClass(class_iri.to_string()).into());
            }
            std::iter::once(class_iri.clone()).collect()
        };
        let rdf_type = ns::rdf_type();
        Ok(graph
            .scan(None, Some(&rdf_type), None)
            .filter(|t| t.object.iri().is_some_and(|c| classes.contains(c)))
            .map(|t| t.subject.clone())
            .collect())
    }

    /// Nodes reachable from `start` via `relation` walks of length in
    /// `[min_hops, max_hops]`; terminates on cyclic graphs.
    pub fn transitive_reach(
        &self,
        graph_id: &Iri,
        start: &Iri,
        relation: &Iri,
        min_hops: u32,
        max_hops: Option<u32>,
    ) -> Result<BTreeSet<Iri>, GraphError> {
        if min_hops < 1 {
            return Err(GraphError::BadHopBounds);
        }
        if self.ontology.relation(relation).is_none() {
            return Err(GraphError::UnknownRelation(relation.clone()));
        }
        let graph = self.snapshot(graph_id)?;
        Ok(graph.reach(start, relation, min_hops, max_hops))
    }
}

fn insert_one(set: &mut BTreeSet<Triple>, t: &Triple) -> usize {
    if let Object::Literal(_) = t.object {
        // Upsert: entity property keys are unique per (subject, predicate).
        let existing: Vec<Triple> = set
            .iter()
            .filter(|e| {
                e.subject == t.subject
                    && e.predicate == t.predicate
                    && matches!(e.object, Object::Literal(_))
            })
            .cloned()
            .collect();
        if existing.iter().any(|e| e == t) {
            return 0;
        }
        for e in existing {
            set.remove(&e);
        }
        set.insert(t.clone());
        1
    } else if set.insert(t.clone()) {
        1
    } else {
        0
    }
}

// ---------------------------------------------------------------------------
// Snapshot file format: one record per triple, tab-separated, sorted.
// ---------------------------------------------------------------------------

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t").replace('\n', "\\n")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('\\') => out.push('\\'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Serializes a graph to the sorted tab-separated snapshot format.
/// Byte-reproducible for equal graph content.
pub fn write_snapshot(graph: &NamedGraph) -> String {
    let mut out = String::new();
    for t in graph.triples() {
        let obj = match &t.object {
            Object::Iri(i) => format!("i:{}", escape(i.as_str())),
            Object::Literal(Literal::Str(s)) => format!("s:{}", escape(s)),
            Object::Literal(Literal::Num { value, unit: None }) => format!("n:{value}"),
            Object::Literal(Literal::Num {
                value,
                unit: Some(u),
            }) => format!("n:{value}^^{u}"),
            Object::Literal(Literal::Bool(b)) => format!("b:{b}"),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            escape(t.subject.as_str()),
            escape(t.predicate.as_str()),
            obj
        ));
    }
    out
}

/// Parses the snapshot format back into a triple list.
pub fn read_snapshot(text: &str) -> Result<Vec<Triple>, String> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(s), Some(p), Some(o)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("snapshot line {}: expected 3 fields", idx + 1));
        };
        let subject = Iri::new(unescape(s)).map_err(|e| e.to_string())?;
        let predicate = Iri::new(unescape(p)).map_err(|e| e.to_string())?;
        let object = match o.split_at_checked(2) {
            Some(("i:", rest)) => Object::Iri(Iri::new(unescape(rest)).map_err(|e| e.to_string())?),
            Some(("s:", rest)) => Object::Literal(Literal::Str(unescape(rest))),
            Some(("n:", rest)) => {
                let (num, unit) = match rest.split_once("^^") {
                    Some((n, u)) => (n, Some(u.to_string())),
                    None => (rest, None),
                };
                let value: f64 = num
                    .parse()
                    .map_err(|_| format!("snapshot line {}: bad number `{num}`", idx + 1))?;
                Object::Literal(Literal::Num { value, unit })
            }
            Some(("b:", rest)) => Object::Literal(Literal::Bool(rest == "true")),
            _ => return Err(format!("snapshot line {}: bad object tag", idx + 1)),
        };
        out.push(Triple::new(subject, predicate, object));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::ns::brick;
    use proptest::prelude::*;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("urn:t:{s}")).unwrap()
    }

    fn store_with_graph(name: &str) -> (GraphStore, Iri) {
        let store = GraphStore::new(Ontology::shipped());
        let g = Iri::new(format!("model:{name}")).unwrap();
        store.create_graph(g.clone()).unwrap();
        (store, g)
    }

    #[test]
    fn inverse_is_materialized_on_write() {
        let (store, g) = store_with_graph("inv");
        let n = store
            .assert_triples(
                &g,
                &[Triple::new(iri("floor1"), brick("hasPart"), iri("room3"))],
            )
            .unwrap();
        assert_eq!(n, 2);
        let snap = store.snapshot(&g).unwrap();
        assert!(snap.contains(&Triple::new(iri("room3"), brick("isPartOf"), iri("floor1"))));
    }

    #[test]
    fn duplicate_insert_counts_zero() {
        let (store, g) = store_with_graph("dup");
        let t = [Triple::new(iri("a"), brick("feeds"), iri("b"))];
        assert_eq!(store.assert_triples(&g, &t).unwrap(), 2);
        assert_eq!(store.assert_triples(&g, &t).unwrap(), 0);
    }

    #[test]
    fn feeds_cycles_are_accepted() {
        let (store, g) = store_with_graph("cyc");
        store
            .assert_triples(&g, &[Triple::new(iri("a"), brick("feeds"), iri("b"))])
            .unwrap();
        store
            .assert_triples(&g, &[Triple::new(iri("b"), brick("feeds"), iri("a"))])
            .unwrap();
        let reach = store
            .transitive_reach(&g, &iri("a"), &brick("feeds"), 1, None)
            .unwrap();
        assert_eq!(reach, [iri("a"), iri("b")].into_iter().collect());
    }

    #[test]
    fn reach_respects_min_hops() {
        let (store, g) = store_with_graph("hops");
        store
            .assert_triples(
                &g,
                &[
                    Triple::new(iri("wing"), brick("hasPart"), iri("floor")),
                    Triple::new(iri("floor"), brick("hasPart"), iri("room")),
                ],
            )
            .unwrap();
        let all = store
            .transitive_reach(&g, &iri("wing"), &brick("hasPart"), 1, None)
            .unwrap();
        assert_eq!(all, [iri("floor"), iri("room")].into_iter().collect());
        let two_plus = store
            .transitive_reach(&g, &iri("wing"), &brick("hasPart"), 2, None)
            .unwrap();
        assert_eq!(two_plus, [iri("room")].into_iter().collect());
        let none = store
            .transitive_reach(&g, &iri("floor"), &brick("hasPart"), 2, None)
            .unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn longer_walks_reach_nodes_missed_by_shortest_path() {
        // a→b, b→c, a→c: c is at shortest distance 1 but also on a 2-walk.
        let (store, g) = store_with_graph("walks");
        store
            .assert_triples(
                &g,
                &[
                    Triple::new(iri("a"), brick("feeds"), iri("b")),
                    Triple::new(iri("b"), brick("feeds"), iri("c")),
                    Triple::new(iri("a"), brick("feeds"), iri("c")),
                ],
            )
            .unwrap();
        let reach = store
            .transitive_reach(&g, &iri("a"), &brick("feeds"), 2, None)
            .unwrap();
        assert_eq!(reach, [iri("c")].into_iter().collect());
    }

    #[test]
    fn published_graph_rejects_writes() {
        let (store, g) = store_with_graph("frozen");
        store.freeze(&g).unwrap();
        let err = store
            .assert_triples(&g, &[Triple::new(iri("a"), brick("feeds"), iri("b"))])
            .unwrap_err();
        assert!(matches!(err, GraphError::Immutable(_)));
    }

    #[test]
    fn unknown_relation_is_an_error() {
        let (store, g) = store_with_graph("rel");
        let err = store
            .transitive_reach(&g, &iri("a"), &iri("notARelation"), 1, None)
            .unwrap_err();
        assert!(matches!(err, GraphError::UnknownRelation(_)));
    }

    #[test]
    fn entities_of_type_exact_and_isa() {
        let (store, g) = store_with_graph("types");
        store
            .assert_triples(
                &g,
                &[
                    Triple::new(iri("s1"), ns::rdf_type(), brick("Outside_Air_Temperature_Sensor")),
                    Triple::new(iri("s2"), ns::rdf_type(), brick("Temperature_Sensor")),
                    Triple::new(iri("e1"), ns::rdf_type(), brick("AHU")),
                ],
            )
            .unwrap();
        let exact = store
            .entities_of_type(&g, &brick("Temperature_Sensor"), false)
            .unwrap();
        assert_eq!(exact, [iri("s2")].into_iter().collect());
        let isa = store
            .entities_of_type(&g, &brick("Temperature_Sensor"), true)
            .unwrap();
        assert_eq!(isa, [iri("s1"), iri("s2")].into_iter().collect());
        let leaf_exact = store
            .entities_of_type(&g, &brick("AHU"), false)
            .unwrap();
        let leaf_isa = store.entities_of_type(&g, &brick("AHU"), true).unwrap();
        assert_eq!(leaf_exact, leaf_isa);
    }

    #[test]
    fn literal_properties_upsert_per_key() {
        let (store, g) = store_with_graph("props");
        let key = ns::bh("rangeMin");
        store
            .assert_triples(&g, &[Triple::new(iri("p"), key.clone(), Literal::num(5.0))])
            .unwrap();
        store
            .assert_triples(&g, &[Triple::new(iri("p"), key.clone(), Literal::num(7.0))])
            .unwrap();
        let snap = store.snapshot(&g).unwrap();
        let props = snap.properties_of(&iri("p"));
        assert_eq!(props.len(), 1);
        assert_eq!(props["rangeMin"].as_f64(), Some(7.0));
    }

    #[test]
    fn snapshot_round_trips_and_is_reproducible() {
        let (store, g) = store_with_graph("snap");
        store
            .assert_triples(
                &g,
                &[
                    Triple::new(iri("a"), brick("feeds"), iri("b")),
                    Triple::new(iri("a"), ns::rdfs_label(), Literal::str("tab\there")),
                    Triple::new(iri("a"), ns::bh("rangeMin"), Literal::Num {
                        value: 5.5,
                        unit: Some("degC".into()),
                    }),
                ],
            )
            .unwrap();
        let snap = store.snapshot(&g).unwrap();
        let text = write_snapshot(&snap);
        let text2 = write_snapshot(&snap);
        assert_eq!(text, text2);

        let triples = read_snapshot(&text).unwrap();
        let (store2, g2) = store_with_graph("snap2");
        store2.assert_triples(&g2, &triples).unwrap();
        let again = write_snapshot(&store2.snapshot(&g2).unwrap());
        assert_eq!(text, again);
    }

    // Dense-matrix walk oracle, independent of the frontier-stepping path.
    fn matrix_reach_oracle(
        n: usize,
        edges: &[(usize, usize)],
        start: usize,
        min: u32,
        max: Option<u32>,
    ) -> BTreeSet<usize> {
        let mut m = vec![vec![false; n]; n];
        for &(a, b) in edges {
            m[a][b] = true;
        }
        let cap = max.unwrap_or(u32::MAX).min(min + 2 * n as u32 + 4);
        let mut power = {
            // identity
            let mut id = vec![vec![false; n]; n];
            for (i, row) in id.iter_mut().enumerate() {
                row[i] = true;
            }
            id
        };
        let mut out = BTreeSet::new();
        for k in 1..=cap {
            let mut next = vec![vec![false; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if power[i][j] {
                        for (t, hit) in next[i].iter_mut().enumerate() {
                            *hit = *hit || m[j][t];
                        }
                    }
                }
            }
            power = next;
            if k >= min {
                for (j, hit) in power[start].iter().enumerate() {
                    if *hit {
                        out.insert(j);
                    }
                }
            }
            if power.iter().all(|row| row.iter().all(|b| !b)) {
                break;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn reach_matches_matrix_oracle(
            n in 2usize..12,
            edges in proptest::collection::vec((0usize..12, 0usize..12), 0..40),
            start in 0usize..12,
            min in 1u32..4,
            max_raw in 0u32..8,
        ) {
            let start = start % n;
            let edges: Vec<(usize, usize)> =
                edges.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let max = if max_raw == 0 { None } else { Some(min + max_raw) };

            let (store, g) = store_with_graph("prop");
            let triples: Vec<Triple> = edges
                .iter()
                .map(|&(a, b)| Triple::new(iri(&format!("n{a}")), brick("feeds"), iri(&format!("n{b}"))))
                .collect();
            store.assert_triples(&g, &triples).unwrap();

            let got = store
                .transitive_reach(&g, &iri(&format!("n{start}")), &brick("feeds"), min, max)
                .unwrap();
            let got_ids: BTreeSet<usize> = got
                .iter()
                .map(|i| i.local_name().trim_start_matches('n').parse::<usize>().unwrap())
                .collect();
            let want = matrix_reach_oracle(n, &edges, start, min, max);
            prop_assert_eq!(got_ids, want);
        }

        #[test]
        fn asserted_triples_are_scannable(
            pairs in proptest::collection::vec((0usize..8, 0usize..8), 1..30)
        ) {
            let (store, g) = store_with_graph("roundtrip");
            let triples: Vec<Triple> = pairs
                .iter()
                .map(|&(a, b)| Triple::new(iri(&format!("x{a}")), brick("hasPart"), iri(&format!("x{b}"))))
                .collect();
            store.assert_triples(&g, &triples).unwrap();
            let snap = store.snapshot(&g).unwrap();
            for t in &triples {
                prop_assert!(snap.contains(t));
                // reciprocal pair present
                let inv = Triple::new(
                    t.object.iri().unwrap().clone(),
                    brick("isPartOf"),
                    t.subject.clone(),
                );
                prop_assert!(snap.contains(&inv));
            }
        }
    }
}
