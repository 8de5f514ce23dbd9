//! Automatic meter-hierarchy discovery over a published model graph.
//!
//! Meters are entities of electrical-meter classes; the hierarchy is the
//! `feeds` edges restricted to the electrical subsystem. Supply roots are
//! non-generation meters with no upstream meter; generation meters (fed by
//! generation-class equipment) downstream of a root are behind the meter
//! and added back, because root supplies measure net import. Generation
//! meters with no connection to a root cannot be attributed and are
//! excluded with a diagnostic rather than silently resolved, as are meters
//! reachable from two independent supply groups.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::NamedGraph;
use crate::ontology::Ontology;
use crate::rdf::{ns, Iri};

use super::consumption::{ChannelKind, MeterExpression, MeterTerm, PointSelection, Sign};
use super::MvError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignedMeter {
    pub sign: Sign,
    pub meter: Iri,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeteringDiscovery {
    pub roots: Vec<Iri>,
    pub generation_meters: Vec<Iri>,
    /// Site-level expression: supply roots plus behind-the-meter generation.
    pub site_terms: Vec<SignedMeter>,
    /// Per-building expressions keyed by building entity.
    pub building_terms: BTreeMap<Iri, Vec<SignedMeter>>,
    pub diagnostics: Vec<String>,
}

fn entity_isa(graph: &NamedGraph, ontology: &Ontology, entity: &Iri, ancestor: &Iri) -> bool {
    graph
        .types_of(entity)
        .iter()
        .any(|c| ontology.is_subclass_of(c, ancestor))
}

fn entities_isa(graph: &NamedGraph, ontology: &Ontology, ancestor: &Iri) -> BTreeSet<Iri> {
    graph
        .entities()
        .into_iter()
        .filter(|e| entity_isa(graph, ontology, e, ancestor))
        .collect()
}

/// Plain reachability (visited-set BFS) over an adjacency map.
fn reachable(adj: &BTreeMap<Iri, BTreeSet<Iri>>, start: &Iri) -> BTreeSet<Iri> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Iri> = adj.get(start).map(|s| s.iter().cloned().collect()).unwrap_or_default();
    while let Some(node) = stack.pop() {
        if out.insert(node.clone()) {
            if let Some(next) = adj.get(&node) {
                stack.extend(next.iter().cloned());
            }
        }
    }
    out
}

/// BFS that collects the first members of `stops` on each branch and does
/// not traverse through them.
fn frontier_until(
    adj: &BTreeMap<Iri, BTreeSet<Iri>>,
    start: &Iri,
    stops: &BTreeSet<Iri>,
) -> BTreeSet<Iri> {
    let mut hits = BTreeSet::new();
    let mut visited = BTreeSet::new();
    let mut stack: Vec<Iri> = adj.get(start).map(|s| s.iter().cloned().collect()).unwrap_or_default();
    while let Some(node) = stack.pop() {
        if !visited.insert(node.clone()) {
            continue;
        }
        if stops.contains(&node) {
            hits.insert(node);
            continue;
        }
        if let Some(next) = adj.get(&node) {
            stack.extend(next.iter().cloned());
        }
    }
    hits
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// A pure function of the graph: identical models produce identical
/// discoveries.
pub fn discover_metering(
    graph: &NamedGraph,
    ontology: &Ontology,
) -> Result<MeteringDiscovery, MvError> {
    let feeds = ns::brick("feeds");
    let has_location = ns::brick("hasLocation");
    let meter_class = ns::brick("Electrical_Meter");
    let electrical_class = ns::brick("Electrical_Equipment");
    let generation_class = ns::brick("Energy_Generation_Equipment");
    let building_class = ns::brick("Building");

    let meters = entities_isa(graph, ontology, &meter_class);
    if meters.is_empty() {
        return Err(MvError::NoMeters);
    }
    let electrical = entities_isa(graph, ontology, &electrical_class);
    let generation_equipment = entities_isa(graph, ontology, &generation_class);
    let buildings = entities_isa(graph, ontology, &building_class);

    let full_adjacency = graph.adjacency(&feeds);
    let mut restricted: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for (from, tos) in &full_adjacency {
        if !electrical.contains(from) {
            continue;
        }
        let filtered: BTreeSet<Iri> = tos.iter().filter(|t| electrical.contains(*t)).cloned().collect();
        if !filtered.is_empty() {
            restricted.insert(from.clone(), filtered);
        }
    }

    // Generation meters: the first meter downstream of generation equipment.
    let mut generation_meters: BTreeSet<Iri> = BTreeSet::new();
    for gen in &generation_equipment {
        generation_meters.extend(frontier_until(&restricted, gen, &meters));
    }

    // Supply roots: non-generation meters with no non-generation meter
    // upstream.
    let downstream_of: BTreeMap<Iri, BTreeSet<Iri>> = meters
        .iter()
        .map(|m| (m.clone(), reachable(&restricted, m)))
        .collect();
    let mut roots: BTreeSet<Iri> = BTreeSet::new();
    for meter in &meters {
        if generation_meters.contains(meter) {
            continue;
        }
        let has_upstream = meters.iter().any(|other| {
            other != meter
                && !generation_meters.contains(other)
                && downstream_of[other].contains(meter)
        });
        if !has_upstream {
            roots.insert(meter.clone());
        }
    }

    let mut diagnostics = Vec::new();

    // Group paralleled roots (shared immediate successors) so that dual
    // supplies into one switchboard are one supply group.
    let root_list: Vec<Iri> = roots.iter().cloned().collect();
    let mut groups = UnionFind::new(root_list.len());
    for i in 0..root_list.len() {
        for j in i + 1..root_list.len() {
            let si = restricted.get(&root_list[i]);
            let sj = restricted.get(&root_list[j]);
            if let (Some(si), Some(sj)) = (si, sj) {
                if si.intersection(sj).next().is_some() {
                    groups.union(i, j);
                }
            }
        }
    }
    let group_of: BTreeMap<&Iri, usize> = root_list
        .iter()
        .enumerate()
        .map(|(i, r)| (r, groups.find(i)))
        .collect();

    // A meter reachable from two independent supply groups cannot be
    // attributed cleanly.
    for meter in &meters {
        if roots.contains(meter) {
            continue;
        }
        let upstream_groups: BTreeSet<usize> = root_list
            .iter()
            .filter(|r| downstream_of[*r].contains(meter))
            .map(|r| group_of[r])
            .collect();
        if upstream_groups.len() >= 2 {
            diagnostics.push(format!(
                "ambiguous hierarchy: meter `{meter}` is downstream of {} independent supply groups",
                upstream_groups.len()
            ));
        }
    }

    // Behind-the-meter generation is added back; island generation is
    // excluded with a diagnostic.
    let mut site_terms: Vec<SignedMeter> = roots
        .iter()
        .map(|m| SignedMeter {
            sign: Sign::Plus,
            meter: m.clone(),
        })
        .collect();
    for gen_meter in &generation_meters {
        let behind = roots.iter().any(|r| downstream_of[r].contains(gen_meter));
        if behind {
            site_terms.push(SignedMeter {
                sign: Sign::Plus,
                meter: gen_meter.clone(),
            });
        } else {
            diagnostics.push(format!(
                "generation meter `{gen_meter}` has no connection downstream of a supply root; \
                 excluded from the site expression"
            ));
        }
    }

    // Buildings served by each meter: full feeds reachability, plus
    // locations of reached equipment.
    let location_adjacency = graph.adjacency(&has_location);
    let serves: BTreeMap<Iri, BTreeSet<Iri>> = meters
        .iter()
        .map(|m| {
            let reach = reachable(&full_adjacency, m);
            let mut served: BTreeSet<Iri> = reach
                .iter()
                .filter(|e| buildings.contains(*e))
                .cloned()
                .collect();
            for e in &reach {
                if let Some(locs) = location_adjacency.get(e) {
                    served.extend(locs.iter().filter(|l| buildings.contains(*l)).cloned());
                }
            }
            (m.clone(), served)
        })
        .collect();

    // Sub-meters immediately downstream of the roots.
    let mut children: BTreeSet<Iri> = BTreeSet::new();
    for root in &roots {
        children.extend(frontier_until(&restricted, root, &meters));
    }

    // Nodes reachable from any root without passing a meter: load hanging
    // there cannot be subtracted at all.
    let mut non_meter_reach: BTreeSet<Iri> = BTreeSet::new();
    for root in &roots {
        let mut visited = BTreeSet::new();
        let mut stack: Vec<Iri> = full_adjacency
            .get(root)
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default();
        while let Some(node) = stack.pop() {
            if !visited.insert(node.clone()) {
                continue;
            }
            if meters.contains(&node) {
                continue;
            }
            non_meter_reach.insert(node.clone());
            if let Some(next) = full_adjacency.get(&node) {
                stack.extend(next.iter().cloned());
            }
        }
    }

    let mut building_terms: BTreeMap<Iri, Vec<SignedMeter>> = BTreeMap::new();
    for building in &buildings {
        let mut terms: Vec<SignedMeter> = roots
            .iter()
            .map(|m| SignedMeter {
                sign: Sign::Plus,
                meter: m.clone(),
            })
            .collect();
        for child in &children {
            let served = &serves[child];
            if served.is_empty() {
                continue;
            }
            if served.contains(building) {
                if served.len() > 1 {
                    diagnostics.push(format!(
                        "meter `{child}` feeds `{building}` and other buildings; its subtraction \
                         is ambiguous for that building's expression"
                    ));
                }
                continue;
            }
            terms.push(SignedMeter {
                sign: Sign::Minus,
                meter: child.clone(),
            });
        }
        for other in &buildings {
            if other != building && non_meter_reach.contains(other) {
                diagnostics.push(format!(
                    "unmetered load path from a supply root reaches `{other}`; the expression \
                     for `{building}` cannot subtract it"
                ));
            }
        }
        building_terms.insert(building.clone(), terms);
    }

    Ok(MeteringDiscovery {
        roots: roots.into_iter().collect(),
        generation_meters: generation_meters.into_iter().collect(),
        site_terms,
        building_terms,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Point selection
// ---------------------------------------------------------------------------

fn classify_channel(ontology: &Ontology, class: &Iri) -> Option<ChannelKind> {
    let isa = |name: &str| ontology.is_subclass_of(class, &ns::brick(name));
    if isa("Energy_Sensor") {
        // Real energy only; reactive and apparent channels are unusable.
        if isa("Reactive_Energy_Sensor") || isa("Apparent_Energy_Sensor") {
            return None;
        }
        return Some(ChannelKind::Energy);
    }
    if isa("Power_Sensor") {
        if isa("Reactive_Power_Sensor") || isa("Apparent_Power_Sensor") {
            return None;
        }
        return Some(ChannelKind::Power);
    }
    None
}

#[derive(Debug, Clone)]
struct CandidatePoint {
    point: Iri,
    stream: String,
    kind: ChannelKind,
    phase: String,
    sense: String,
}

/// Deterministic preference order for a meter's data channel:
/// energy over power, then three-phase total over per-phase (per-phase only
/// when all three phases are present, summed), then net over import sense.
/// Reactive and apparent channels are never selected.
pub fn select_meter_point(
    graph: &NamedGraph,
    ontology: &Ontology,
    meter: &Iri,
) -> Result<PointSelection, MvError> {
    let has_point = ns::brick("hasPoint");
    let mut candidates: Vec<CandidatePoint> = Vec::new();
    for point in graph.successors(meter, &has_point) {
        let Some(kind) = graph
            .types_of(&point)
            .iter()
            .find_map(|c| classify_channel(ontology, c))
        else {
            continue;
        };
        let props = graph.properties_of(&point);
        let Some(stream) = props.get("streamRef").and_then(|l| l.as_str()).map(String::from)
        else {
            continue;
        };
        candidates.push(CandidatePoint {
            point,
            stream,
            kind,
            phase: props
                .get("phase")
                .and_then(|l| l.as_str())
                .unwrap_or("total")
                .to_string(),
            sense: props
                .get("sense")
                .and_then(|l| l.as_str())
                .unwrap_or("net")
                .to_string(),
        });
    }
    candidates.sort_by(|a, b| a.point.cmp(&b.point));

    for kind in [ChannelKind::Energy, ChannelKind::Power] {
        for phase_sum in [false, true] {
            for sense in ["net", "import"] {
                if !phase_sum {
                    if let Some(hit) = candidates.iter().find(|c| {
                        c.kind == kind && c.phase == "total" && c.sense == sense
                    }) {
                        return Ok(PointSelection {
                            kind,
                            points: vec![hit.point.clone()],
                            streams: vec![hit.stream.clone()],
                            sense: sense.to_string(),
                            phase_sum: false,
                        });
                    }
                } else {
                    let phase = |p: &str| {
                        candidates
                            .iter()
                            .find(|c| c.kind == kind && c.phase == p && c.sense == sense)
                    };
                    if let (Some(a), Some(b), Some(c)) = (phase("A"), phase("B"), phase("C")) {
                        return Ok(PointSelection {
                            kind,
                            points: vec![a.point.clone(), b.point.clone(), c.point.clone()],
                            streams: vec![a.stream.clone(), b.stream.clone(), c.stream.clone()],
                            sense: sense.to_string(),
                            phase_sum: true,
                        });
                    }
                }
            }
        }
    }
    Err(MvError::NoUsablePoint(meter.clone()))
}

/// Resolves a signed meter list into a full expression by selecting each
/// meter's data channel.
pub fn resolve_expression(
    graph: &NamedGraph,
    ontology: &Ontology,
    terms: &[SignedMeter],
) -> Result<MeterExpression, MvError> {
    let resolved = terms
        .iter()
        .map(|t| {
            Ok(MeterTerm {
                sign: t.sign,
                meter: t.meter.clone(),
                selection: select_meter_point(graph, ontology, &t.meter)?,
            })
        })
        .collect::<Result<Vec<_>, MvError>>()?;
    Ok(MeterExpression { terms: resolved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphStore;
    use crate::rdf::parse_turtle;

    const FIGURE4: &str = include_str!("../../fixtures/figure4_metering.ttl");

    fn ex(name: &str) -> Iri {
        Iri::new(format!("urn:fixture:metering#{name}")).unwrap()
    }

    fn load_fixture() -> (GraphStore, Iri) {
        let store = GraphStore::new(Ontology::shipped());
        let g = Iri::new("model:metering").unwrap();
        store.create_graph(g.clone()).unwrap();
        store
            .assert_triples(&g, &parse_turtle(FIGURE4).unwrap())
            .unwrap();
        (store, g)
    }

    fn signs(terms: &[SignedMeter]) -> Vec<(Sign, String)> {
        let mut v: Vec<(Sign, String)> = terms
            .iter()
            .map(|t| (t.sign, t.meter.local_name().to_string()))
            .collect();
        v.sort_by(|a, b| a.1.cmp(&b.1));
        v
    }

    #[test]
    fn site_expression_includes_behind_meter_generation_only() {
        let (store, g) = load_fixture();
        let graph = store.snapshot(&g).unwrap();
        let discovery = discover_metering(&graph, store.ontology()).unwrap();

        assert_eq!(
            signs(&discovery.site_terms),
            vec![
                (Sign::Plus, "b060g".to_string()),
                (Sign::Plus, "supply1".to_string()),
                (Sign::Plus, "supply2".to_string()),
            ]
        );
        assert!(
            discovery
                .diagnostics
                .iter()
                .any(|d| d.contains("b501g") && d.contains("excluded")),
            "{:?}",
            discovery.diagnostics
        );
        // The paralleled supplies are one group: no ambiguity diagnostics.
        assert!(
            !discovery.diagnostics.iter().any(|d| d.contains("ambiguous")),
            "{:?}",
            discovery.diagnostics
        );
    }

    #[test]
    fn building_501_subtracts_sibling_submeters() {
        let (store, g) = load_fixture();
        let graph = store.snapshot(&g).unwrap();
        let discovery = discover_metering(&graph, store.ontology()).unwrap();
        let terms = &discovery.building_terms[&ex("bldg501")];
        assert_eq!(
            signs(terms),
            vec![
                (Sign::Minus, "b061".to_string()),
                (Sign::Minus, "b062".to_string()),
                (Sign::Plus, "supply1".to_string()),
                (Sign::Plus, "supply2".to_string()),
            ]
        );
    }

    #[test]
    fn single_root_no_generation_is_trivial() {
        let store = GraphStore::new(Ontology::shipped());
        let g = Iri::new("model:single").unwrap();
        store.create_graph(g.clone()).unwrap();
        let doc = r#"
@prefix brick: <https://brickschema.org/schema/Brick#> .
@prefix ex: <urn:t:> .
ex:main a brick:Electrical_Meter ;
    brick:feeds ex:board .
ex:board a brick:Switchboard .
"#;
        store.assert_triples(&g, &parse_turtle(doc).unwrap()).unwrap();
        let graph = store.snapshot(&g).unwrap();
        let discovery = discover_metering(&graph, store.ontology()).unwrap();
        assert_eq!(discovery.site_terms.len(), 1);
        assert_eq!(discovery.site_terms[0].sign, Sign::Plus);
        assert!(discovery.diagnostics.is_empty());
    }

    #[test]
    fn no_meters_is_an_error() {
        let store = GraphStore::new(Ontology::shipped());
        let g = Iri::new("model:none").unwrap();
        store.create_graph(g.clone()).unwrap();
        let graph = store.snapshot(&g).unwrap();
        assert!(matches!(
            discover_metering(&graph, store.ontology()),
            Err(MvError::NoMeters)
        ));
    }

    #[test]
    fn energy_preferred_over_power() {
        let (store, g) = load_fixture();
        let graph = store.snapshot(&g).unwrap();
        let selection = select_meter_point(&graph, store.ontology(), &ex("supply1")).unwrap();
        assert_eq!(selection.kind, ChannelKind::Energy);
        assert_eq!(selection.streams, vec!["s-supply1-e".to_string()]);
    }

    #[test]
    fn per_phase_energy_sums_all_three_phases() {
        let (store, g) = load_fixture();
        let graph = store.snapshot(&g).unwrap();
        let selection = select_meter_point(&graph, store.ontology(), &ex("b062")).unwrap();
        assert!(selection.phase_sum);
        assert_eq!(selection.streams.len(), 3);
        assert_eq!(
            selection.streams,
            vec!["s-b062-a".to_string(), "s-b062-b".into(), "s-b062-c".into()]
        );
    }

    #[test]
    fn reactive_only_meter_has_no_usable_point() {
        let store = GraphStore::new(Ontology::shipped());
        let g = Iri::new("model:reactive").unwrap();
        store.create_graph(g.clone()).unwrap();
        let doc = r#"
@prefix brick: <https://brickschema.org/schema/Brick#> .
@prefix bh: <urn:brickhouse:vocab#> .
@prefix ex: <urn:t:> .
ex:m a brick:Electrical_Meter ;
    brick:hasPoint ex:kvarh .
ex:kvarh a brick:Reactive_Energy_Sensor ;
    bh:streamRef "s-kvarh" .
"#;
        store.assert_triples(&g, &parse_turtle(doc).unwrap()).unwrap();
        let graph = store.snapshot(&g).unwrap();
        assert!(matches!(
            select_meter_point(&graph, store.ontology(), &Iri::new("urn:t:m").unwrap()),
            Err(MvError::NoUsablePoint(_))
        ));
    }
}
