//! Query planning and evaluation.
//!
//! Planning computes candidate entity sets per variable from the type
//! matchers against each graph snapshot and orders variables by ascending
//! candidate-set size (ties broken by declaration order). Evaluation is a
//! backtracking join over those candidates; each path constraint is checked
//! as soon as both of its endpoints are bound, using capped frontier
//! stepping so cyclic `feeds` topologies terminate.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use std::time::Instant;

use super::{
    BriqlError, BriqlQuery, BriqlResponse, EntityRecord, Fetch, PointFilter, PointInfo,
    QueryLimits, TypeMatcher,
};
use crate::graph::{reach_over, GraphStore, NamedGraph};
use crate::ontology::Ontology;
use crate::rdf::{ns, Iri, Literal};

/// Resolves stream metadata for `pointinfo` records: id → (unit, quantity kind).
pub type StreamInfoFn<'a> = &'a dyn Fn(&str) -> Option<(String, String)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlanStrategy {
    /// Ascending candidate-set size, ties by declaration order.
    #[default]
    Selectivity,
    /// Declaration order as written (the solution set must not change).
    DeclarationOrder,
}

/// A path with its relationship names resolved.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedPath {
    pub from: usize,
    pub steps: Vec<(Iri, u32, Option<u32>)>,
    pub to: usize,
}

/// Per-graph plan: the snapshot it was computed against, candidate sets in
/// declaration order, and the binding order.
pub struct GraphPlan {
    pub graph_id: Iri,
    pub(crate) graph: Arc<NamedGraph>,
    pub candidates: Vec<BTreeSet<Iri>>,
    pub order: Vec<usize>,
}

pub struct Plan {
    pub graphs: Vec<GraphPlan>,
    pub(crate) paths: Vec<ResolvedPath>,
}

impl Plan {
    /// Candidate count per variable (declaration order) for one graph.
    pub fn candidate_counts(&self, graph_idx: usize) -> Vec<usize> {
        self.graphs[graph_idx]
            .candidates
            .iter()
            .map(|c| c.len())
            .collect()
    }
}

/// Candidate entities for one matcher against one graph.
pub(crate) fn matcher_candidates(
    graph: &NamedGraph,
    ontology: &Ontology,
    matcher: &TypeMatcher,
) -> Result<BTreeSet<Iri>, BriqlError> {
    let rdf_type = ns::rdf_type();
    let classes: BTreeSet<Iri> = match matcher {
        TypeMatcher::Exact(name) => std::iter::once(ontology.resolve_class(name)?).collect(),
        TypeMatcher::Isa(name) => {
            let class = ontology.resolve_class(name)?;
            ontology.subclasses_of(&class)?
        }
        TypeMatcher::Tags(tags) => {
            ontology.classes_matching_tags(tags.iter().map(|s| s.as_str()))
        }
        TypeMatcher::Properties(wanted) => {
            let mut out = BTreeSet::new();
            for entity in graph.entities() {
                let props = graph.properties_of(&entity);
                if wanted.iter().all(|(k, v)| props.get(k) == Some(v)) {
                    out.insert(entity);
                }
            }
            return Ok(out);
        }
    };
    Ok(graph
        .scan(None, Some(&rdf_type), None)
        .filter(|t| t.object.iri().is_some_and(|c| classes.contains(c)))
        .map(|t| t.subject.clone())
        .collect())
}

/// Plans a query against a list of graphs, applying any variable bindings
/// (a bound variable keeps type validation but skips the scan ordering).
pub fn plan(
    store: &GraphStore,
    query: &BriqlQuery,
    graph_ids: &[Iri],
    bindings: &BTreeMap<String, Iri>,
) -> Result<Plan, BriqlError> {
    plan_with(store, query, graph_ids, bindings, PlanStrategy::Selectivity)
}

pub fn plan_with(
    store: &GraphStore,
    query: &BriqlQuery,
    graph_ids: &[Iri],
    bindings: &BTreeMap<String, Iri>,
    strategy: PlanStrategy,
) -> Result<Plan, BriqlError> {
    for name in bindings.keys() {
        if query.variable(name).is_none() {
            return Err(BriqlError::BadArgument(name.clone()));
        }
    }
    let ontology = store.ontology();

    let mut paths = Vec::new();
    for p in &query.paths {
        let steps = p
            .steps
            .iter()
            .map(|s| Ok((ontology.resolve_relation(&s.property)?, s.min, s.max)))
            .collect::<Result<Vec<_>, BriqlError>>()?;
        paths.push(ResolvedPath {
            from: query.variable_index(&p.from_ref).expect("validated at parse"),
            steps,
            to: query.variable_index(&p.to_ref).expect("validated at parse"),
        });
    }

    let mut graphs = Vec::new();
    for graph_id in graph_ids {
        let graph = store.snapshot(graph_id)?;
        let mut candidates = Vec::new();
        for var in &query.variables {
            let mut set = matcher_candidates(&graph, ontology, &var.matcher)?;
            let bound = bindings
                .get(&var.name)
                .or(var.default_binding.as_ref());
            if let Some(entity) = bound {
                // Type validation is kept: the binding must satisfy the matcher.
                set = if set.contains(entity) {
                    std::iter::once(entity.clone()).collect()
                } else {
                    BTreeSet::new()
                };
            }
            candidates.push(set);
        }
        let mut order: Vec<usize> = (0..query.variables.len()).collect();
        if strategy == PlanStrategy::Selectivity {
            order.sort_by_key(|&i| (candidates[i].len(), i));
        }
        graphs.push(GraphPlan {
            graph_id: graph_id.clone(),
            graph,
            candidates,
            order,
        });
    }

    Ok(Plan { graphs, paths })
}

struct Budget<'a> {
    limits: &'a QueryLimits,
    started: Instant,
    ticks: u64,
}

impl Budget<'_> {
    fn tick(&mut self) -> Result<(), BriqlError> {
        self.ticks += 1;
        if self.ticks > self.limits.max_bindings {
            return Err(BriqlError::ResourceLimit("intermediate binding ceiling"));
        }
        if self.ticks.is_multiple_of(4096) && self.started.elapsed() > self.limits.max_wall {
            return Err(BriqlError::ResourceLimit("wall-clock ceiling"));
        }
        Ok(())
    }
}

/// Evaluates a plan into the entity list + solution table response.
pub fn evaluate(
    store: &GraphStore,
    query: &BriqlQuery,
    plan: &Plan,
    limits: &QueryLimits,
    stream_info: StreamInfoFn,
) -> Result<BriqlResponse, BriqlError> {
    let ontology = store.ontology();
    let mut response = BriqlResponse::default();
    let mut budget = Budget {
        limits,
        started: Instant::now(),
        ticks: 0,
    };
    // Entity record index per (graph, entity, variable).
    let mut entity_index: HashMap<(Iri, Iri, usize), usize> = HashMap::new();

    let output_vars: Vec<usize> = query
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.output)
        .map(|(i, _)| i)
        .collect();

    for gp in &plan.graphs {
        // Paths become checkable at the first order position where both
        // endpoints are bound.
        let position_of: BTreeMap<usize, usize> = gp
            .order
            .iter()
            .enumerate()
            .map(|(pos, &var)| (var, pos))
            .collect();
        let mut checks_at: Vec<Vec<usize>> = vec![Vec::new(); gp.order.len()];
        for (pi, p) in plan.paths.iter().enumerate() {
            let pos = position_of[&p.from].max(position_of[&p.to]);
            checks_at[pos].push(pi);
        }

        let mut reach_cache: HashMap<(usize, Iri), BTreeSet<Iri>> = HashMap::new();
        let mut adjacency: HashMap<Iri, Adjacency> = HashMap::new();
        for p in &plan.paths {
            for (rel, _, _) in &p.steps {
                adjacency
                    .entry(rel.clone())
                    .or_insert_with(|| gp.graph.adjacency(rel));
            }
        }

        let mut assignment: Vec<Option<Iri>> = vec![None; query.variables.len()];
        let mut seen_rows: BTreeSet<Vec<(Iri, usize)>> = BTreeSet::new();

        search(
            gp,
            plan,
            0,
            &checks_at,
            &mut assignment,
            &mut budget,
            &mut reach_cache,
            &adjacency,
            &mut |assignment, budget| {
                let row_key: Vec<(Iri, usize)> = output_vars
                    .iter()
                    .map(|&vi| (assignment[vi].clone().unwrap(), vi))
                    .collect();
                if !seen_rows.insert(row_key) {
                    return Ok(());
                }
                budget.tick()?;
                let mut row = BTreeMap::new();
                for &vi in &output_vars {
                    let entity = assignment[vi].clone().unwrap();
                    let key = (gp.graph_id.clone(), entity.clone(), vi);
                    let idx = match entity_index.get(&key) {
                        Some(&idx) => idx,
                        None => {
                            let record = build_entity_record(
                                &gp.graph_id,
                                &gp.graph,
                                ontology,
                                &entity,
                                &query.variables[vi],
                                stream_info,
                            );
                            response.entities.push(record);
                            let idx = response.entities.len() - 1;
                            entity_index.insert(key, idx);
                            idx
                        }
                    };
                    row.insert(query.variables[vi].name.clone(), idx);
                }
                response.solutions.push(row);
                Ok(())
            },
        )?;
    }

    Ok(response)
}

type Adjacency = BTreeMap<Iri, BTreeSet<Iri>>;
type EmitFn<'a> = dyn FnMut(&Vec<Option<Iri>>, &mut Budget) -> Result<(), BriqlError> + 'a;

#[allow(clippy::too_many_arguments)]
fn search(
    gp: &GraphPlan,
    plan: &Plan,
    depth: usize,
    checks_at: &[Vec<usize>],
    assignment: &mut Vec<Option<Iri>>,
    budget: &mut Budget,
    reach_cache: &mut HashMap<(usize, Iri), BTreeSet<Iri>>,
    adjacency: &HashMap<Iri, Adjacency>,
    emit: &mut EmitFn,
) -> Result<(), BriqlError> {
    if depth == gp.order.len() {
        return emit(assignment, budget);
    }
    let var = gp.order[depth];
    let candidates = gp.candidates[var].clone();
    for candidate in candidates {
        budget.tick()?;
        assignment[var] = Some(candidate);
        let mut ok = true;
        for &pi in &checks_at[depth] {
            let p = &plan.paths[pi];
            let from = assignment[p.from].as_ref().unwrap();
            let to = assignment[p.to].as_ref().unwrap();
            let reached = reach_cache
                .entry((pi, from.clone()))
                .or_insert_with(|| walk_path(adjacency, from, &p.steps));
            if !reached.contains(to) {
                ok = false;
                break;
            }
        }
        if ok {
            search(
                gp, plan, depth + 1, checks_at, assignment, budget, reach_cache, adjacency,
                emit,
            )?;
        }
        assignment[var] = None;
    }
    Ok(())
}

/// Nodes reachable from `from` by walking each step's relation with its hop
/// bounds in sequence.
fn walk_path(
    adjacency: &HashMap<Iri, Adjacency>,
    from: &Iri,
    steps: &[(Iri, u32, Option<u32>)],
) -> BTreeSet<Iri> {
    let mut current: BTreeSet<Iri> = std::iter::once(from.clone()).collect();
    for (rel, min, max) in steps {
        let adj = &adjacency[rel];
        current = reach_over(adj, current, *min, *max);
        if current.is_empty() {
            break;
        }
    }
    current
}

fn build_entity_record(
    graph_id: &Iri,
    graph: &NamedGraph,
    ontology: &Ontology,
    entity: &Iri,
    var: &super::VariableDecl,
    stream_info: StreamInfoFn,
) -> EntityRecord {
    let types = graph.types_of(entity);
    let class = types
        .iter()
        .next()
        .cloned()
        .unwrap_or_else(|| ns::bh("Unknown"));
    let label = var
        .fetch
        .contains(&Fetch::Label)
        .then(|| graph.label_of(entity))
        .flatten();
    let properties = var
        .fetch
        .contains(&Fetch::Properties)
        .then(|| graph.properties_of(entity));
    let points = var.fetch.contains(&Fetch::PointInfo).then(|| {
        attached_points(graph, ontology, entity, &var.fetch_points, stream_info)
    });
    EntityRecord {
        id: entity.clone(),
        model: graph_id.clone(),
        class,
        label,
        properties,
        points,
    }
}

/// Points attached via a single `hasPoint` hop whose class passes at least
/// one filter (no filters = all points).
pub(crate) fn attached_points(
    graph: &NamedGraph,
    ontology: &Ontology,
    entity: &Iri,
    filters: &[PointFilter],
    stream_info: StreamInfoFn,
) -> Vec<PointInfo> {
    let has_point = ns::brick("hasPoint");
    let point_root = ns::brick("Point");
    let mut out = Vec::new();
    for point in graph.successors(entity, &has_point) {
        let Some(class) = graph
            .types_of(&point)
            .into_iter()
            .find(|c| ontology.is_subclass_of(c, &point_root))
        else {
            continue;
        };
        let passes = filters.is_empty()
            || filters.iter().any(|f| match f {
                PointFilter::Tags(tags) => ontology
                    .class(&class)
                    .is_some_and(|c| tags.iter().all(|t| c.tags.contains(t))),
                PointFilter::Isa(name) => ontology
                    .resolve_class(name)
                    .is_ok_and(|target| ontology.is_subclass_of(&class, &target)),
            });
        if !passes {
            continue;
        }
        let props = graph.properties_of(&point);
        let stream = props.get("streamRef").and_then(|l| l.as_str()).map(String::from);
        let (unit, quantity_kind) = match stream.as_deref().and_then(stream_info) {
            Some((u, q)) => (Some(u), Some(q)),
            None => (
                props.get("unit").and_then(|l| l.as_str()).map(String::from),
                props
                    .get("quantityKind")
                    .and_then(|l| l.as_str())
                    .map(String::from),
            ),
        };
        out.push(PointInfo {
            id: point,
            class,
            stream,
            unit,
            quantity_kind,
        });
    }
    out
}

/// Equality predicate used by the tags-matcher invariant: an entity matches
/// tags T iff its class is in `classes_matching_tags(T)`.
pub fn entity_matches_tags(
    graph: &NamedGraph,
    ontology: &Ontology,
    entity: &Iri,
    tags: &BTreeSet<String>,
) -> bool {
    let classes = ontology.classes_matching_tags(tags.iter().map(|s| s.as_str()));
    graph.types_of(entity).iter().any(|c| classes.contains(c))
}

#[allow(dead_code)]
fn literal_eq(a: &Literal, b: &Literal) -> bool {
    a == b
}
