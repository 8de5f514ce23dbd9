//! Acceptance suite. One test per criterion, numbered, so the runner
//! prints a pass/fail line for each. Criteria 1–10 exercise the library;
//! criterion 11 drives the shipped binary end to end over HTTP.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use brickhouse::briql::{self, PlanStrategy, QueryLimits};
use brickhouse::directory::{Role, Scope};
use brickhouse::graph::{GraphStore, NamedGraph};
use brickhouse::ingest::{self, parse_nem12, HealthKind, HealthPolicy, RangeBounds};
use brickhouse::mv::{
    discover_metering, estimate_savings, fit_baseline, DayRecord, Sign,
};
use brickhouse::ontology::Ontology;
use brickhouse::rdf::{ns, parse_turtle, Iri, Literal, Triple};
use brickhouse::timeseries::{Observation, QuantityKind, StreamMeta, TimeseriesStore, Window};
use brickhouse::{Platform, PlatformError, QueryRef};

const FIGURE2: &str = include_str!("../fixtures/figure2_hvac.ttl");
const FIGURE4: &str = include_str!("../fixtures/figure4_metering.ttl");
const EXAMPLE_QUERY: &str = include_str!("../fixtures/example_query.briql.json");
const SAMPLE_NEM12: &str = include_str!("../fixtures/sample_nem12.csv");

const DAY: i64 = 86_400;

fn gaussian(rng: &mut StdRng, sigma: f64) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn truth(t: f64) -> f64 {
    100.0 + 5.0 * (t - 18.0).max(0.0)
}

// ---------------------------------------------------------------------------
// Criterion 1: the worked query example over the HVAC fixture.
// ---------------------------------------------------------------------------

#[test]
fn c01_briql_worked_example_returns_exactly_the_two_documented_pairs() {
    let platform = Platform::new();
    platform.directory.add_grant("root", Scope::Platform, Role::Admin);
    let org = platform.directory.create_org("Acceptance", "root").unwrap();
    let site = platform
        .directory
        .create_site(&org, "HVAC Site", 0.0, 0.0, "x", None, "root")
        .unwrap();
    let draft = platform.upload_draft(&site, FIGURE2, "root").unwrap();
    assert_eq!(
        platform.validate_model(&site, draft.version).unwrap().error_count(),
        0
    );
    platform.publish_model(&site, draft.version, "root").unwrap();

    let started = Instant::now();
    let response = platform
        .invoke_query(
            &QueryRef::Inline(EXAMPLE_QUERY.to_string()),
            &[site],
            &BTreeMap::new(),
            "root",
        )
        .unwrap();
    let elapsed = started.elapsed();

    assert_eq!(response.solutions.len(), 2, "exactly two solutions");
    let mut pairs: Vec<(String, String, String, String)> = response
        .solutions
        .iter()
        .map(|row| {
            let ahu = &response.entities[row["ahu"]];
            let room = &response.entities[row["room"]];
            let point = |e: &briql::EntityRecord| {
                let points = e.points.as_ref().expect("pointinfo fetched");
                assert_eq!(points.len(), 1, "one matching point per entity");
                points[0].id.local_name().to_string()
            };
            (
                ahu.id.local_name().to_string(),
                point(ahu),
                room.id.local_name().to_string(),
                point(room),
            )
        })
        .collect();
    pairs.sort();
    assert_eq!(
        pairs,
        vec![
            ("ahu0".into(), "ahu0_oa".into(), "g01".into(), "temp_g01".into()),
            ("ahu1".into(), "ahu1_oa".into(), "142".into(), "temp_142".into()),
        ]
    );
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    eprintln!("criterion 1: PASS (worked example, {elapsed:?})");
}

// ---------------------------------------------------------------------------
// Criterion 2: evaluator equals brute-force assignment enumeration.
// ---------------------------------------------------------------------------

/// Walk-length reachability oracle via dense boolean matrix powers,
/// independent of the engine's frontier stepping.
fn oracle_reach(
    graph: &NamedGraph,
    relation: &Iri,
    start: &Iri,
    min: u32,
    max: Option<u32>,
) -> BTreeSet<Iri> {
    let mut nodes: Vec<Iri> = Vec::new();
    let mut index: BTreeMap<Iri, usize> = BTreeMap::new();
    let intern = |iri: &Iri, nodes: &mut Vec<Iri>, index: &mut BTreeMap<Iri, usize>| {
        *index.entry(iri.clone()).or_insert_with(|| {
            nodes.push(iri.clone());
            nodes.len() - 1
        })
    };
    let mut edges = Vec::new();
    for t in graph.scan(None, Some(relation), None) {
        if let Some(obj) = t.object.iri() {
            let a = intern(&t.subject, &mut nodes, &mut index);
            let b = intern(obj, &mut nodes, &mut index);
            edges.push((a, b));
        }
    }
    let Some(&start_idx) = index.get(start) else {
        return BTreeSet::new();
    };
    let n = nodes.len();
    let mut m = vec![vec![false; n]; n];
    for (a, b) in edges {
        m[a][b] = true;
    }
    let cap = max.unwrap_or(u32::MAX).min(min + 2 * n as u32 + 4);
    let mut power = vec![vec![false; n]; n];
    for (i, row) in power.iter_mut().enumerate() {
        row[i] = true;
    }
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
            for (j, hit) in power[start_idx].iter().enumerate() {
                if *hit {
                    out.insert(nodes[j].clone());
                }
            }
        }
        if power.iter().all(|row| row.iter().all(|b| !b)) {
            break;
        }
    }
    out
}

/// Brute-force enumeration of every variable assignment, checked against
/// matchers and path constraints directly.
fn oracle_solutions(
    graph: &NamedGraph,
    ontology: &Ontology,
    query: &briql::BriqlQuery,
) -> BTreeSet<Vec<(String, Iri)>> {
    let candidates: Vec<Vec<Iri>> = query
        .variables
        .iter()
        .map(|var| {
            graph
                .entities()
                .into_iter()
                .filter(|entity| {
                    let types = graph.types_of(entity);
                    match &var.matcher {
                        briql::TypeMatcher::Exact(name) => {
                            let class = ontology.resolve_class(name).unwrap();
                            types.contains(&class)
                        }
                        briql::TypeMatcher::Isa(name) => {
                            let class = ontology.resolve_class(name).unwrap();
                            let closure = ontology.subclasses_of(&class).unwrap();
                            types.iter().any(|t| closure.contains(t))
                        }
                        briql::TypeMatcher::Tags(tags) => types.iter().any(|t| {
                            ontology
                                .class(t)
                                .is_some_and(|c| tags.iter().all(|tag| c.tags.contains(tag)))
                        }),
                        briql::TypeMatcher::Properties(wanted) => {
                            let props = graph.properties_of(entity);
                            wanted.iter().all(|(k, v)| props.get(k) == Some(v))
                        }
                    }
                })
                .collect()
        })
        .collect();

    let mut reach_memo: BTreeMap<(usize, Iri), BTreeSet<Iri>> = BTreeMap::new();
    let mut path_holds = |pi: usize, path: &briql::PathConstraint, from: &Iri, to: &Iri| -> bool {
        let key = (pi, from.clone());
        let reached = reach_memo.entry(key).or_insert_with(|| {
            let mut current: BTreeSet<Iri> = std::iter::once(from.clone()).collect();
            for step in &path.steps {
                let relation = Ontology::shipped().resolve_relation(&step.property).unwrap();
                let mut next = BTreeSet::new();
                for node in &current {
                    next.extend(oracle_reach(graph, &relation, node, step.min, step.max));
                }
                current = next;
                if current.is_empty() {
                    break;
                }
            }
            current
        });
        reached.contains(to)
    };

    let mut out = BTreeSet::new();
    let k = query.variables.len();
    let mut assignment = vec![0usize; k];
    'outer: loop {
        if candidates.iter().any(|c| c.is_empty()) {
            break;
        }
        let entities: Vec<&Iri> = assignment
            .iter()
            .enumerate()
            .map(|(v, &i)| &candidates[v][i])
            .collect();
        let satisfied = query.paths.iter().enumerate().all(|(pi, p)| {
            let from = entities[query.variable_index(&p.from_ref).unwrap()];
            let to = entities[query.variable_index(&p.to_ref).unwrap()];
            path_holds(pi, p, from, to)
        });
        if satisfied {
            let row: Vec<(String, Iri)> = query
                .variables
                .iter()
                .enumerate()
                .filter(|(_, v)| v.output)
                .map(|(i, v)| (v.name.clone(), entities[i].clone()))
                .collect();
            out.insert(row);
        }
        // advance odometer
        for v in (0..k).rev() {
            assignment[v] += 1;
            if assignment[v] < candidates[v].len() {
                continue 'outer;
            }
            assignment[v] = 0;
            if v == 0 {
                break 'outer;
            }
        }
        if k == 0 {
            break;
        }
    }
    out
}

fn engine_rows(
    store: &GraphStore,
    query: &briql::BriqlQuery,
    graph_id: &Iri,
    strategy: PlanStrategy,
) -> BTreeSet<Vec<(String, Iri)>> {
    let plan = briql::plan_with(store, query, std::slice::from_ref(graph_id), &BTreeMap::new(), strategy)
        .unwrap();
    let response =
        briql::evaluate(store, query, &plan, &QueryLimits::default(), &|_| None).unwrap();
    response
        .solutions
        .iter()
        .map(|row| {
            row.iter()
                .map(|(name, &idx)| (name.clone(), response.entities[idx].id.clone()))
                .collect()
        })
        .collect()
}

#[test]
fn c02_query_engine_matches_bruteforce_enumeration_on_200_random_cases() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(20_240_301);
    let ontology = Ontology::shipped();
    let class_pool = [
        "Room", "Floor", "AHU", "VAV", "Fan", "Pump", "Electrical_Meter",
        "Temperature_Sensor", "Zone_Air_Temperature_Sensor", "Energy_Sensor", "Switchboard",
    ];
    let isa_pool = ["Equipment", "Point", "Location", "Sensor", "HVAC_Equipment", "Room"];
    let relations = ["feeds", "hasPart", "hasPoint"];

    for case in 0..200 {
        let store = GraphStore::new(ontology.clone());
        let graph_id = Iri::new(format!("model:case{case}")).unwrap();
        store.create_graph(graph_id.clone()).unwrap();

        let n = rng.gen_range(3..=30);
        let mut triples = Vec::new();
        let node = |i: usize| Iri::new(format!("urn:case{case}:n{i}")).unwrap();
        for i in 0..n {
            let class = class_pool[rng.gen_range(0..class_pool.len())];
            triples.push(Triple::new(node(i), ns::rdf_type(), ns::brick(class)));
            if rng.gen_bool(0.5) {
                let zone = if rng.gen_bool(0.5) { "a" } else { "b" };
                triples.push(Triple::new(node(i), ns::bh("zone"), Literal::str(zone)));
            }
        }
        let edge_count = rng.gen_range(0..=2 * n);
        for _ in 0..edge_count {
            let rel = relations[rng.gen_range(0..relations.len())];
            triples.push(Triple::new(
                node(rng.gen_range(0..n)),
                ns::brick(rel),
                node(rng.gen_range(0..n)),
            ));
        }
        store.assert_triples(&graph_id, &triples).unwrap();

        let var_count = rng.gen_range(1..=3);
        let mut variables = Vec::new();
        for v in 0..var_count {
            let matcher = match rng.gen_range(0..4) {
                0 => json!({"match": "exact", "type": class_pool[rng.gen_range(0..class_pool.len())]}),
                1 => json!({"match": "isa", "type": isa_pool[rng.gen_range(0..isa_pool.len())]}),
                2 => {
                    let class = ns::brick(class_pool[rng.gen_range(0..class_pool.len())]);
                    let tags: Vec<String> = ontology
                        .class(&class)
                        .unwrap()
                        .tags
                        .iter()
                        .filter(|_| rng.gen_bool(0.7))
                        .cloned()
                        .collect();
                    json!({"match": "tags", "tags": tags})
                }
                _ => json!({"match": "properties", "properties": {"zone": if rng.gen_bool(0.5) {"a"} else {"b"}}}),
            };
            variables.push(json!({
                "name": format!("v{v}"),
                "output": v == 0 || rng.gen_bool(0.7),
                "brick_type": matcher,
            }));
        }
        let mut paths = Vec::new();
        if var_count >= 2 {
            for _ in 0..rng.gen_range(0..=2u32) {
                let from = rng.gen_range(0..var_count);
                let mut to = rng.gen_range(0..var_count);
                if to == from {
                    to = (to + 1) % var_count;
                }
                let min = rng.gen_range(1..=2);
                let max: Option<u32> = if rng.gen_bool(0.5) {
                    None
                } else {
                    Some(min + rng.gen_range(0..=3))
                };
                let mut step = json!({
                    "property": relations[rng.gen_range(0..relations.len())],
                    "min": min,
                });
                if let Some(max) = max {
                    step["max"] = json!(max);
                }
                paths.push(json!({
                    "from_ref": format!("v{from}"),
                    "properties": [step],
                    "to_ref": format!("v{to}"),
                }));
            }
        }
        let mut doc = json!({ "variables": variables });
        if !paths.is_empty() {
            doc["query"] = json!({ "paths": paths });
        }
        let query = briql::parse_query(&doc.to_string()).unwrap();

        let graph = store.snapshot(&graph_id).unwrap();
        let expected = oracle_solutions(&graph, &ontology, &query);
        let selectivity = engine_rows(&store, &query, &graph_id, PlanStrategy::Selectivity);
        let declaration = engine_rows(&store, &query, &graph_id, PlanStrategy::DeclarationOrder);
        assert_eq!(selectivity, expected, "case {case} (selectivity plan)");
        assert_eq!(declaration, expected, "case {case} (declaration plan)");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    eprintln!("criterion 2: PASS (200 randomized oracle cases, {elapsed:?})");
}

// ---------------------------------------------------------------------------
// Criterion 3: cyclic feeds topology terminates with each pair once.
// ---------------------------------------------------------------------------

#[test]
fn c03_cyclic_feeds_terminates_and_returns_each_pair_once() {
    let (done_tx, done_rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let store = GraphStore::new(Ontology::shipped());
        let graph_id = Iri::new("model:cycle4").unwrap();
        store.create_graph(graph_id.clone()).unwrap();
        let node = |i: usize| Iri::new(format!("urn:cycle:p{i}")).unwrap();
        let mut triples = Vec::new();
        for i in 0..4 {
            triples.push(Triple::new(node(i), ns::rdf_type(), ns::brick("Pump")));
            triples.push(Triple::new(node(i), ns::brick("feeds"), node((i + 1) % 4)));
        }
        store.assert_triples(&graph_id, &triples).unwrap();

        let query = briql::parse_query(
            r#"{
              "variables": [
                {"name": "x", "brick_type": {"match": "isa", "type": "Pump"}},
                {"name": "y", "brick_type": {"match": "isa", "type": "Pump"}}
              ],
              "query": {"paths": [{"from_ref": "x", "properties": [{"property": "feeds", "min": 1}], "to_ref": "y"}]}
            }"#,
        )
        .unwrap();
        let plan = briql::plan(&store, &query, &[graph_id], &BTreeMap::new()).unwrap();
        let response =
            briql::evaluate(&store, &query, &plan, &QueryLimits::default(), &|_| None).unwrap();
        done_tx.send(response).ok();
    });

    let response = done_rx
        .recv_timeout(Duration::from_secs(5))
        .expect("evaluation must terminate within the 5 s hard timeout");
    // In a 4-cycle every ordered pair (self included) qualifies, once.
    assert_eq!(response.solutions.len(), 16);
    let unique: BTreeSet<Vec<usize>> = response
        .solutions
        .iter()
        .map(|row| row.values().cloned().collect())
        .collect();
    assert_eq!(unique.len(), 16, "no duplicate pairs");
    eprintln!("criterion 3: PASS (cyclic feeds, 16 unique pairs)");
}

// ---------------------------------------------------------------------------
// Criterion 4: meter discovery on the campus fixture.
// ---------------------------------------------------------------------------

#[test]
fn c04_meter_discovery_matches_the_documented_expressions() {
    let store = GraphStore::new(Ontology::shipped());
    let graph_id = Iri::new("model:campus").unwrap();
    store.create_graph(graph_id.clone()).unwrap();
    store
        .assert_triples(&graph_id, &parse_turtle(FIGURE4).unwrap())
        .unwrap();
    let graph = store.snapshot(&graph_id).unwrap();
    let discovery = discover_metering(&graph, store.ontology()).unwrap();

    let signs = |terms: &[brickhouse::mv::SignedMeter]| -> BTreeSet<(char, String)> {
        terms
            .iter()
            .map(|t| {
                (
                    if t.sign == Sign::Plus { '+' } else { '-' },
                    t.meter.local_name().to_string(),
                )
            })
            .collect()
    };

    assert_eq!(
        signs(&discovery.site_terms),
        [
            ('+', "supply1".to_string()),
            ('+', "supply2".to_string()),
            ('+', "b060g".to_string()),
        ]
        .into_iter()
        .collect::<BTreeSet<_>>(),
        "site expression"
    );
    assert!(
        discovery
            .diagnostics
            .iter()
            .any(|d| d.contains("b501g") && d.contains("excluded")),
        "B501G excluded with a diagnostic: {:?}",
        discovery.diagnostics
    );

    let b501 = Iri::new("urn:fixture:metering#bldg501").unwrap();
    assert_eq!(
        signs(&discovery.building_terms[&b501]),
        [
            ('+', "supply1".to_string()),
            ('+', "supply2".to_string()),
            ('-', "b061".to_string()),
            ('-', "b062".to_string()),
        ]
        .into_iter()
        .collect::<BTreeSet<_>>(),
        "building 501 expression"
    );
    eprintln!("criterion 4: PASS (site and building 501 expressions exact)");
}

// ---------------------------------------------------------------------------
// Criterion 5: change-point parameter recovery.
// ---------------------------------------------------------------------------

fn synth_days(n: usize, seed: u64, noise: f64, factor: f64) -> Vec<DayRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = 8.0 + 22.0 * rng.gen::<f64>();
            DayRecord {
                day_start: i as i64 * DAY,
                temperature: t,
                energy_kwh: factor * truth(t) + gaussian(&mut rng, noise),
            }
        })
        .collect()
}

#[test]
fn c05_mv_parameter_recovery_noiseless_and_noisy() {
    // Noiseless: recovery within 1e-6 relative.
    let days = synth_days(365, 5, 0.0, 1.0);
    let model = fit_baseline(&days).unwrap();
    assert!((model.baseload - 100.0).abs() / 100.0 < 1e-6, "{model:?}");
    assert!((model.cooling_slope - 5.0).abs() / 5.0 < 1e-6, "{model:?}");
    assert!(
        (model.cooling_change_point.unwrap() - 18.0).abs() / 18.0 < 1e-6,
        "{model:?}"
    );

    // Gaussian noise sigma = 5 kWh/day: within 5% relative over 20 seeds.
    for seed in 0..20u64 {
        let days = synth_days(365, 100 + seed, 5.0, 1.0);
        let model = fit_baseline(&days).unwrap();
        let tc = model.cooling_change_point.expect("cooling term");
        assert!((model.baseload - 100.0).abs() / 100.0 < 0.05, "seed {seed}: {model:?}");
        assert!((model.cooling_slope - 5.0).abs() / 5.0 < 0.05, "seed {seed}: {model:?}");
        assert!((tc - 18.0).abs() / 18.0 < 0.05, "seed {seed}: {model:?}");
    }
    eprintln!("criterion 5: PASS (noiseless 1e-6, noisy 5% over 20 seeds)");
}

// ---------------------------------------------------------------------------
// Criterion 6: confidence-interval coverage by Monte Carlo.
// ---------------------------------------------------------------------------

#[test]
fn c06_confidence_interval_covers_true_savings_91_to_99_percent() {
    let started = Instant::now();
    let replications = 200;
    let mut hits = 0;
    for seed in 0..replications {
        let mut rng = StdRng::seed_from_u64(60_000 + seed);
        let baseline: Vec<DayRecord> = (0..365)
            .map(|i| {
                let t = 8.0 + 22.0 * rng.gen::<f64>();
                DayRecord {
                    day_start: i * DAY,
                    temperature: t,
                    energy_kwh: truth(t) + gaussian(&mut rng, 5.0),
                }
            })
            .collect();
        let model = fit_baseline(&baseline).unwrap();

        // 15% injected savings over 90 analysis days.
        let analysis: Vec<DayRecord> = (0..90)
            .map(|i| {
                let t = 8.0 + 22.0 * rng.gen::<f64>();
                DayRecord {
                    day_start: (365 + i) * DAY,
                    temperature: t,
                    energy_kwh: 0.85 * truth(t) + gaussian(&mut rng, 5.0),
                }
            })
            .collect();
        let true_savings: f64 = analysis.iter().map(|d| 0.15 * truth(d.temperature)).sum();

        let result =
            estimate_savings(&model, &analysis, 90, 0, 1.0, 0, 1.0, 0.0, 0.95).unwrap();
        if result.ci_low <= true_savings && true_savings <= result.ci_high {
            hits += 1;
        }
    }
    let rate = hits as f64 / replications as f64;
    let elapsed = started.elapsed();
    assert!(
        (0.91..=0.99).contains(&rate),
        "coverage {rate} outside [0.91, 0.99]"
    );
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    eprintln!("criterion 6: PASS (coverage {rate:.3} over 200 replications, {elapsed:?})");
}

// ---------------------------------------------------------------------------
// Criterion 7: NEM12 and completeness arithmetic.
// ---------------------------------------------------------------------------

#[test]
fn c07_nem12_expansion_and_completeness_arithmetic() {
    let (document, series) = parse_nem12(SAMPLE_NEM12, 10 * 3600).unwrap();
    assert_eq!(document.blocks.len(), 1, "one NMI");
    assert_eq!(document.blocks[0].interval_minutes, 30);
    assert_eq!(document.blocks[0].days.len(), 2, "two day-records");
    let observations = &series[&document.blocks[0].nmi];
    assert_eq!(observations.len(), 96, "exactly 96 observations");

    let store = TimeseriesStore::new();
    store
        .create_stream(StreamMeta {
            stream_id: "meter".into(),
            quantity_kind: QuantityKind::Energy,
            unit: "kWh".into(),
            bound_point: None,
            expected_interval_seconds: Some(1800),
            owner_target: None,
        })
        .unwrap();
    store.append("meter", observations).unwrap();
    let first = observations[0].timestamp;
    let full_day = Window::new(first, first + DAY).unwrap();
    assert_eq!(store.completeness("meter", full_day, 1800).unwrap(), 1.0);

    // A 36-of-48-slot day measures 0.75.
    store
        .create_stream(StreamMeta {
            stream_id: "partial".into(),
            quantity_kind: QuantityKind::Energy,
            unit: "kWh".into(),
            bound_point: None,
            expected_interval_seconds: Some(1800),
            owner_target: None,
        })
        .unwrap();
    let partial: Vec<Observation> = (0..36).map(|i| Observation::new(i * 1800, 1.0)).collect();
    store.append("partial", &partial).unwrap();
    assert_eq!(
        store.completeness("partial", Window::new(0, DAY).unwrap(), 1800).unwrap(),
        0.75
    );
    eprintln!("criterion 7: PASS (96 observations; completeness 1.0 and 0.75)");
}

// ---------------------------------------------------------------------------
// Criterion 8: data-health fixtures, one finding each, clean control zero.
// ---------------------------------------------------------------------------

#[test]
fn c08_injected_anomalies_produce_exactly_one_finding_each() {
    let meta = StreamMeta {
        stream_id: "s".into(),
        quantity_kind: QuantityKind::Temperature,
        unit: "degC".into(),
        bound_point: None,
        expected_interval_seconds: Some(1800),
        owner_target: None,
    };
    let day = Window::new(0, DAY).unwrap();
    let policy = HealthPolicy::with_now(DAY);
    let varied = |i: usize| 21.0 + ((i % 5) as f64) * 0.3;

    // Clean control: full varied day, zero findings.
    let control: Vec<Observation> =
        (0..48).map(|i| Observation::new(i as i64 * 1800, varied(i))).collect();
    let findings =
        ingest::run_health_checks("control", &meta, &control, RangeBounds::default(), day, &policy);
    assert!(findings.is_empty(), "control: {findings:?}");

    // Stale: 20 identical readings across 10 h at 30-minute interval.
    let mut stale = control.clone();
    for obs in stale.iter_mut().take(34).skip(14) {
        obs.value = 19.5;
    }
    let findings =
        ingest::run_health_checks("stale", &meta, &stale, RangeBounds::default(), day, &policy);
    assert_eq!(findings.len(), 1, "{findings:?}");
    assert_eq!(findings[0].kind, HealthKind::Stale);

    // Out of range with modelled [5, 45] range properties; the identical
    // series without the properties yields nothing.
    let mut ranged = control.clone();
    ranged[20].value = 0.0;
    let findings = ingest::run_health_checks(
        "office",
        &meta,
        &ranged,
        RangeBounds { min: Some(5.0), max: Some(45.0) },
        day,
        &policy,
    );
    assert_eq!(findings.len(), 1, "{findings:?}");
    assert_eq!(findings[0].kind, HealthKind::OutOfRange);
    let none = ingest::run_health_checks(
        "freezer",
        &meta,
        &ranged,
        RangeBounds::default(),
        day,
        &policy,
    );
    assert!(none.is_empty(), "no range properties, no finding: {none:?}");

    // Future timestamp: 10 minutes past the reference clock, 5-minute skew.
    let now = 40 * 1800;
    let mut future: Vec<Observation> =
        (0..40).map(|i| Observation::new(i as i64 * 1800, varied(i as usize))).collect();
    future.push(Observation::new(now + 600, 21.0));
    let findings = ingest::run_health_checks(
        "drift",
        &meta,
        &future,
        RangeBounds::default(),
        Window::new(0, DAY).unwrap(),
        &HealthPolicy::with_now(now),
    );
    assert_eq!(findings.len(), 1, "{findings:?}");
    assert_eq!(findings[0].kind, HealthKind::FutureTimestamp);

    // Coverage gap: a four-hour hole in an otherwise varied day.
    let gappy: Vec<Observation> = (0..48)
        .filter(|i| !(16..24).contains(i))
        .map(|i| Observation::new(i as i64 * 1800, varied(i as usize)))
        .collect();
    let findings =
        ingest::run_health_checks("outage", &meta, &gappy, RangeBounds::default(), day, &policy);
    assert_eq!(findings.len(), 1, "{findings:?}");
    assert_eq!(findings[0].kind, HealthKind::Gap);

    eprintln!("criterion 8: PASS (one finding per injected anomaly, clean control zero)");
}

// ---------------------------------------------------------------------------
// Criterion 9: RBAC default-deny against a brute-force oracle.
// ---------------------------------------------------------------------------

#[test]
fn c09_rbac_matches_scope_walk_oracle_and_denies_before_evaluation() {
    let mut rng = StdRng::seed_from_u64(99);
    let platform = Platform::new();
    let dir = &platform.directory;
    dir.add_grant("root", Scope::Platform, Role::Admin);

    let mut sites = Vec::new();
    let mut buildings = Vec::new();
    let mut orgs = Vec::new();
    for o in 0..2 {
        let org = dir.create_org(&format!("Org {o}"), "root").unwrap();
        for s in 0..2 {
            let site = dir
                .create_site(&org, &format!("Site {o}-{s}"), 0.0, 0.0, "x", None, "root")
                .unwrap();
            for b in 0..2 {
                buildings.push(dir.create_building(&site, &format!("B {o}-{s}-{b}"), "root").unwrap());
            }
            sites.push(site);
        }
        orgs.push(org);
    }

    // Random grants over random principals.
    let roles = [Role::Reader, Role::Modeler, Role::Admin];
    let principals: Vec<String> = (0..6).map(|i| format!("user{i}")).collect();
    let mut granted: BTreeMap<String, Vec<(Scope, Role)>> = BTreeMap::new();
    for principal in &principals {
        for _ in 0..rng.gen_range(0..=3) {
            let scope = match rng.gen_range(0..3) {
                0 => Scope::Org(orgs[rng.gen_range(0..orgs.len())].clone()),
                1 => Scope::Site(sites[rng.gen_range(0..sites.len())].clone()),
                _ => Scope::Building(buildings[rng.gen_range(0..buildings.len())].clone()),
            };
            let role = roles[rng.gen_range(0..3)];
            dir.add_grant(principal, scope.clone(), role);
            granted.entry(principal.clone()).or_default().push((scope, role));
        }
    }

    // Independent downward-cover oracle: a grant covers an object iff the
    // object lies in the grant scope's subtree.
    let org_of_site = |s: &str| dir.site(s).unwrap().org;
    let site_of_building = |b: &str| dir.building(b).unwrap().site;
    let covers = |grant: &Scope, object: &Scope| -> bool {
        match grant {
            Scope::Platform => true,
            Scope::Org(o) => match object {
                Scope::Org(x) => x == o,
                Scope::Site(s) => &org_of_site(s) == o,
                Scope::Building(b) => &org_of_site(&site_of_building(b)) == o,
                Scope::Platform => false,
            },
            Scope::Site(s) => match object {
                Scope::Site(x) => x == s,
                Scope::Building(b) => &site_of_building(b) == s,
                _ => false,
            },
            Scope::Building(g) => matches!(object, Scope::Building(x) if x == g),
        }
    };

    for check in 0..100 {
        let principal = &principals[rng.gen_range(0..principals.len())];
        let object = match rng.gen_range(0..3) {
            0 => Scope::Org(orgs[rng.gen_range(0..orgs.len())].clone()),
            1 => Scope::Site(sites[rng.gen_range(0..sites.len())].clone()),
            _ => Scope::Building(buildings[rng.gen_range(0..buildings.len())].clone()),
        };
        let needed = roles[rng.gen_range(0..3)];
        let expected = granted
            .get(principal)
            .map(|grants| {
                grants
                    .iter()
                    .any(|(scope, role)| role >= &needed && covers(scope, &object))
            })
            .unwrap_or(false);
        let got = dir.check_access(principal, &object, needed);
        assert_eq!(got, expected, "check {check}: {principal} {object} {needed:?}");
    }

    // Cross-org invocation is denied before any evaluation: the query body
    // references an unknown class and would fail at planning, but the
    // denial must come first.
    dir.add_grant("outsider", Scope::Org(orgs[0].clone()), Role::Reader);
    let foreign_site = &sites[2]; // belongs to org 1
    let bad_query = r#"{"variables": [{"name": "x", "brick_type": {"match": "isa", "type": "NoSuchClass"}}]}"#;
    let err = platform
        .invoke_query(
            &QueryRef::Inline(bad_query.to_string()),
            std::slice::from_ref(foreign_site),
            &BTreeMap::new(),
            "outsider",
        )
        .unwrap_err();
    match err {
        PlatformError::ModelsDenied(denied) => assert_eq!(denied, vec![foreign_site.clone()]),
        other => panic!("expected denial before evaluation, got {other:?}"),
    }
    eprintln!("criterion 9: PASS (100 oracle checks; cross-org denied before evaluation)");
}

// ---------------------------------------------------------------------------
// Criterion 10: sandbox isolation against a hostile entrypoint.
// ---------------------------------------------------------------------------

#[test]
fn c10_hostile_entrypoint_fails_both_probes_and_is_recorded() {
    let platform = Platform::new();
    platform.directory.add_grant("root", Scope::Platform, Role::Admin);
    let org = platform.directory.create_org("Probe Org", "root").unwrap();
    let site = platform
        .directory
        .create_site(&org, "Probe Site", 0.0, 0.0, "x", None, "root")
        .unwrap();
    let draft = platform.upload_draft(&site, FIGURE2, "root").unwrap();
    platform.publish_model(&site, draft.version, "root").unwrap();

    // A real stream that exists but is not bound to the installation.
    platform
        .create_stream(
            StreamMeta {
                stream_id: "secret-stream".into(),
                quantity_kind: QuantityKind::Energy,
                unit: "kWh".into(),
                bound_point: None,
                expected_interval_seconds: None,
                owner_target: None,
            },
            "root",
        )
        .unwrap();
    platform
        .timeseries
        .append("secret-stream", &[Observation::new(0, 42.0)])
        .unwrap();

    let package = brickhouse::apps::AppPackage {
        app_id: "sandbox-probe".into(),
        version: 0,
        name: "Sandbox probe".into(),
        description: String::new(),
        resources: Default::default(),
        discovery: brickhouse::apps::DiscoveryRef::Inline(
            r#"{"variables": [{"name": "any", "brick_type": {"match": "tags", "tags": []}}]}"#
                .into(),
        ),
        entrypoint: "sandbox-probe".into(),
        config_schema: Value::Null,
    };
    platform.register_app(package).unwrap();
    let installation = platform
        .install_app(
            "sandbox-probe",
            1,
            &site,
            json!({"probe_stream": "secret-stream", "probe_endpoint": "http://203.0.113.7/exfil"}),
            "root",
        )
        .unwrap();
    assert_eq!(installation.state, brickhouse::apps::InstallState::Bound);

    let streams_before = platform.timeseries.stream_ids();
    let record = platform
        .run_app(&installation.install_id, 1_000_000, "root")
        .unwrap();
    assert_eq!(record.state, brickhouse::apps::RunState::SandboxViolation);
    assert_eq!(record.violations.len(), 2, "{:?}", record.violations);
    assert!(record.violations[0].contains("secret-stream"));
    assert!(record.violations[1].contains("external endpoint"));
    assert!(record.result.is_none(), "no result leaves a violating run");
    assert!(record.outputs.is_empty(), "no output streams were written");
    assert_eq!(
        platform.timeseries.stream_ids(),
        streams_before,
        "no data left the run"
    );
    eprintln!("criterion 10: PASS (both hostile probes failed; run recorded as violation)");
}

// ---------------------------------------------------------------------------
// Criterion 11: criteria 1, 4, 5, and 7 through the CLI against a live
// service.
// ---------------------------------------------------------------------------

mod cli {
    use super::*;
    use std::io::BufRead;
    use std::process::{Child, Command, Stdio};

    pub struct Server {
        child: Child,
        pub base_url: String,
        _dir: tempfile::TempDir,
    }

    impl Drop for Server {
        fn drop(&mut self) {
            self.child.kill().ok();
            self.child.wait().ok();
        }
    }

    pub fn start_server() -> Server {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("config.toml");
        std::fs::write(
            &config_path,
            format!(
                r#"
bind = "127.0.0.1:0"
data_dir = "{}"

[[tokens]]
token = "root-token"
principal = "root"
grants = [{{ scope = "platform", role = "admin" }}]

[[tokens]]
token = "outsider-token"
principal = "outsider"
"#,
                dir.path().join("data").display()
            ),
        )
        .unwrap();
        let mut child = Command::new(env!("CARGO_BIN_EXE_brickhouse"))
            .args(["serve", "--config"])
            .arg(&config_path)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let stdout = child.stdout.take().unwrap();
        let mut lines = std::io::BufReader::new(stdout).lines();
        let first = lines
            .next()
            .expect("server prints its listening address")
            .unwrap();
        let announced: Value = serde_json::from_str(&first).unwrap();
        let base_url = format!("http://{}", announced["listening"].as_str().unwrap());
        Server {
            child,
            base_url,
            _dir: dir,
        }
    }

    pub fn run(server: &Server, args: &[&str]) -> (bool, Value) {
        let output = Command::new(env!("CARGO_BIN_EXE_brickhouse"))
            .args(args)
            .env("BRICKHOUSE_SERVER", &server.base_url)
            .env("BRICKHOUSE_TOKEN", "root-token")
            .output()
            .unwrap();
        let stdout = String::from_utf8_lossy(&output.stdout);
        let value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
        (output.status.success(), value)
    }

    pub fn run_ok(server: &Server, args: &[&str]) -> Value {
        let (ok, value) = run(server, args);
        assert!(ok, "CLI {args:?} failed: {value}");
        value
    }
}

fn write_temp(dir: &std::path::Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_string_lossy().into_owned()
}

/// Daily payload for the campus streams with a given seed/noise; returns
/// the payload JSON. Baseline 365 days plus 90 analysis days with a 10
/// kWh/day intervention.
fn campus_payload(seed: u64, noise: f64, base_start: i64) -> Value {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut points: BTreeMap<&str, Vec<Value>> = BTreeMap::new();
    for name in ["supply1", "supply2", "b060g", "oat"] {
        points.insert(name, Vec::new());
    }
    for d in 0..455 {
        let ts = base_start + d * DAY;
        let iso = chrono::DateTime::from_timestamp(ts, 0)
            .unwrap()
            .format("%Y-%m-%dT%H:%M:%SZ")
            .to_string();
        let t = 8.0 + 22.0 * rng.gen::<f64>();
        let mut e = truth(t) + gaussian(&mut rng, noise);
        if d >= 365 {
            e -= 10.0;
        }
        points.get_mut("supply1").unwrap().push(json!({"t": iso, "v": e - 4.0}));
        points.get_mut("supply2").unwrap().push(json!({"t": iso, "v": 3.0}));
        points.get_mut("b060g").unwrap().push(json!({"t": iso, "v": 1.0}));
        points.get_mut("oat").unwrap().push(json!({"t": iso, "v": t}));
    }
    json!({
        "gateway": "gw-campus",
        "points": points
            .into_iter()
            .map(|(name, observations)| json!({
                "source_point_name": name,
                "observations": observations,
            }))
            .collect::<Vec<_>>(),
    })
}

#[test]
fn c11_criteria_1_4_5_7_pass_through_the_cli_alone() {
    let server = cli::start_server();
    let tmp = tempfile::tempdir().unwrap();
    let fixtures = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");

    // --- shared directory objects -----------------------------------------
    cli::run_ok(&server, &["org", "create", "--name", "Acceptance Org"]);

    // --- criterion 1 via CLI ------------------------------------------------
    cli::run_ok(&server, &[
        "site", "create", "--org", "org-1", "--name", "HVAC Site", "--address", "x",
    ]);
    let figure2 = fixtures.join("figure2_hvac.ttl");
    cli::run_ok(&server, &[
        "model", "upload", "--target", "site-1", "--file", figure2.to_str().unwrap(),
    ]);
    let report = cli::run_ok(&server, &[
        "model", "validate", "--target", "site-1", "--version", "1",
    ]);
    let errors = report["findings"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["severity"] == "error")
        .count();
    assert_eq!(errors, 0, "fixture validates clean");
    cli::run_ok(&server, &[
        "model", "publish", "--target", "site-1", "--version", "1",
    ]);
    let example_query = fixtures.join("example_query.briql.json");
    let response = cli::run_ok(&server, &[
        "query", "invoke", "--file", example_query.to_str().unwrap(), "--model", "site-1",
    ]);
    let solutions = response["solutions"].as_array().unwrap();
    assert_eq!(solutions.len(), 2, "criterion 1 via CLI");
    let mut pairs: Vec<(String, String)> = solutions
        .iter()
        .map(|row| {
            let entity = |idx: &Value| {
                response["entities"][idx.as_u64().unwrap() as usize]["id"]
                    .as_str()
                    .unwrap()
                    .rsplit('#')
                    .next()
                    .unwrap()
                    .to_string()
            };
            (entity(&row["ahu"]), entity(&row["room"]))
        })
        .collect();
    pairs.sort();
    assert_eq!(
        pairs,
        vec![
            ("ahu0".to_string(), "g01".to_string()),
            ("ahu1".to_string(), "142".to_string()),
        ]
    );
    eprintln!("criterion 11.1: PASS (worked example via CLI)");

    // --- criterion 4 via CLI --------------------------------------------------
    cli::run_ok(&server, &[
        "site", "create", "--org", "org-1", "--name", "Campus", "--address", "x",
    ]);
    let figure4 = fixtures.join("figure4_metering.ttl");
    cli::run_ok(&server, &[
        "model", "upload", "--target", "site-2", "--file", figure4.to_str().unwrap(),
    ]);
    cli::run_ok(&server, &[
        "model", "publish", "--target", "site-2", "--version", "1",
    ]);
    for (id, quantity, unit) in [
        ("s-supply1-e", "Energy", "kWh"),
        ("s-supply2-e", "Energy", "kWh"),
        ("s-b060g-e", "Energy", "kWh"),
        ("s-b061-e", "Energy", "kWh"),
        ("s-b062-a", "Energy", "kWh"),
        ("s-b062-b", "Energy", "kWh"),
        ("s-b062-c", "Energy", "kWh"),
        ("s-oat", "Temperature", "degC"),
    ] {
        cli::run_ok(&server, &[
            "stream", "create", "--id", id, "--quantity", quantity, "--unit", unit,
            "--interval", "86400", "--owner", "site-2",
        ]);
    }
    let manifest_dir = fixtures.join("mv_app");
    cli::run_ok(&server, &[
        "app", "register", "--package", manifest_dir.to_str().unwrap(),
    ]);
    let install = cli::run_ok(&server, &[
        "app", "install", "--app", "mv-optionc", "--target", "site-2", "--config",
        &write_temp(
            tmp.path(),
            "mv_config.json",
            &json!({
                "baseline": {"start": 1672531200i64, "end": 1672531200i64 + 365 * DAY},
                "analysis": {"start": 1672531200i64 + 365 * DAY, "end": 1672531200i64 + 455 * DAY},
            })
            .to_string(),
        ),
    ]);
    assert_eq!(install["state"], "bound");
    let terms: BTreeSet<(String, String)> = install["bindings"]["data"]["expression"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["sign"].as_str().unwrap().to_string(),
                t["meter"].as_str().unwrap().rsplit('#').next().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(
        terms,
        [
            ("plus".to_string(), "supply1".to_string()),
            ("plus".to_string(), "supply2".to_string()),
            ("plus".to_string(), "b060g".to_string()),
        ]
        .into_iter()
        .collect::<BTreeSet<_>>(),
        "site expression via CLI"
    );
    let diagnostics = install["bindings"]["data"]["discovery_diagnostics"].to_string();
    assert!(diagnostics.contains("b501g") && diagnostics.contains("excluded"));

    // Building 501: the same model published on the building target.
    cli::run_ok(&server, &[
        "building", "create", "--site", "site-2", "--name", "Building 501",
    ]);
    cli::run_ok(&server, &[
        "model", "upload", "--target", "building-1", "--file", figure4.to_str().unwrap(),
    ]);
    cli::run_ok(&server, &[
        "model", "publish", "--target", "building-1", "--version", "1",
    ]);
    let install_501 = cli::run_ok(&server, &[
        "app", "install", "--app", "mv-optionc", "--target", "building-1", "--config",
        &write_temp(
            tmp.path(),
            "mv_config_501.json",
            &json!({
                "baseline": {"start": 1672531200i64, "end": 1672531200i64 + 365 * DAY},
                "analysis": {"start": 1672531200i64 + 365 * DAY, "end": 1672531200i64 + 455 * DAY},
            })
            .to_string(),
        ),
    ]);
    assert_eq!(install_501["state"], "bound", "{install_501}");
    let terms_501: BTreeSet<(String, String)> = install_501["bindings"]["data"]["expression"]
        ["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["sign"].as_str().unwrap().to_string(),
                t["meter"].as_str().unwrap().rsplit('#').next().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(
        terms_501,
        [
            ("plus".to_string(), "supply1".to_string()),
            ("plus".to_string(), "supply2".to_string()),
            ("minus".to_string(), "b061".to_string()),
            ("minus".to_string(), "b062".to_string()),
        ]
        .into_iter()
        .collect::<BTreeSet<_>>(),
        "building 501 expression via CLI"
    );
    eprintln!("criterion 11.4: PASS (meter discovery via CLI)");

    // --- criterion 5 via CLI ---------------------------------------------------
    let rules = json!([
        {"gateway": "gw-campus", "source_point_name": "supply1", "stream_id": "s-supply1-e"},
        {"gateway": "gw-campus", "source_point_name": "supply2", "stream_id": "s-supply2-e"},
        {"gateway": "gw-campus", "source_point_name": "b060g", "stream_id": "s-b060g-e"},
        {"gateway": "gw-campus", "source_point_name": "oat", "stream_id": "s-oat"},
    ]);
    let rules_path = write_temp(tmp.path(), "rules.json", &rules.to_string());

    // Noiseless: parameters within 1e-6 relative, exact savings.
    let payload_path = write_temp(
        tmp.path(),
        "payload.json",
        &campus_payload(41, 0.0, 1672531200).to_string(),
    );
    cli::run_ok(&server, &[
        "ingest", "dch-json", "--file", &payload_path, "--rules", &rules_path,
    ]);
    let run = cli::run_ok(&server, &[
        "app", "run", "--install", "install-1", "--as-of", "1717200000",
    ]);
    assert_eq!(run["state"], "completed", "{run}");
    let model = &run["result"]["model"];
    let rel = |got: f64, want: f64| (got - want).abs() / want;
    assert!(rel(model["baseload"].as_f64().unwrap(), 100.0) < 1e-6, "{model}");
    assert!(rel(model["cooling_slope"].as_f64().unwrap(), 5.0) < 1e-6, "{model}");
    assert!(rel(model["cooling_change_point"].as_f64().unwrap(), 18.0) < 1e-6, "{model}");
    assert!(
        (run["result"]["savings_kwh"].as_f64().unwrap() - 900.0).abs() < 1e-6,
        "90 days x 10 kWh/day"
    );

    // Noisy (sigma = 5): parameters within 5% relative over 20 seeds,
    // re-ingesting the same timestamps (upsert) and re-running each time.
    for seed in 0..20u64 {
        let payload_path = write_temp(
            tmp.path(),
            &format!("payload_{seed}.json"),
            &campus_payload(1000 + seed, 5.0, 1672531200).to_string(),
        );
        cli::run_ok(&server, &[
            "ingest", "dch-json", "--file", &payload_path, "--rules", &rules_path,
        ]);
        let run = cli::run_ok(&server, &[
            "app", "run", "--install", "install-1", "--as-of", "1717200000",
        ]);
        assert_eq!(run["state"], "completed", "seed {seed}: {run}");
        let model = &run["result"]["model"];
        assert!(
            rel(model["baseload"].as_f64().unwrap(), 100.0) < 0.05,
            "seed {seed}: {model}"
        );
        assert!(
            rel(model["cooling_slope"].as_f64().unwrap(), 5.0) < 0.05,
            "seed {seed}: {model}"
        );
        assert!(
            rel(model["cooling_change_point"].as_f64().unwrap(), 18.0) < 0.05,
            "seed {seed}: {model}"
        );
    }
    eprintln!("criterion 11.5: PASS (parameter recovery via CLI, noiseless and 20 noisy seeds)");

    // --- criterion 7 via CLI ------------------------------------------------------
    let nem12_path = fixtures.join("sample_nem12.csv");
    let report = cli::run_ok(&server, &[
        "ingest", "nem12", "--file", nem12_path.to_str().unwrap(), "--stream", "nmi-meter",
        "--offset", "+10:00",
    ]);
    assert_eq!(report["ingested"], 96, "{report}");
    let first = 1709215200i64; // 2024-03-01T00:00 local at UTC+10
    let health = cli::run_ok(&server, &[
        "stream", "health", "--stream", "nmi-meter",
        "--start", &first.to_string(),
        "--end", &(first + DAY).to_string(),
        "--now", &(first + 2 * DAY).to_string(),
    ]);
    assert_eq!(health["completeness"], 1.0, "{health}");

    // A 36-of-48 day via the gateway payload path measures 0.75.
    cli::run_ok(&server, &[
        "stream", "create", "--id", "partial-day", "--quantity", "Energy", "--unit", "kWh",
        "--interval", "1800",
    ]);
    let partial_obs: Vec<Value> = (0..36)
        .map(|i| {
            let iso = chrono::DateTime::from_timestamp(first + i * 1800, 0)
                .unwrap()
                .format("%Y-%m-%dT%H:%M:%SZ")
                .to_string();
            json!({"t": iso, "v": 1.0})
        })
        .collect();
    let partial_payload = json!({
        "gateway": "gw",
        "points": [{"source_point_name": "p", "observations": partial_obs}],
    });
    let partial_rules = json!([
        {"gateway": "gw", "source_point_name": "p", "stream_id": "partial-day"}
    ]);
    cli::run_ok(&server, &[
        "ingest", "dch-json",
        "--file", &write_temp(tmp.path(), "partial.json", &partial_payload.to_string()),
        "--rules", &write_temp(tmp.path(), "partial_rules.json", &partial_rules.to_string()),
    ]);
    let health = cli::run_ok(&server, &[
        "stream", "health", "--stream", "partial-day",
        "--start", &first.to_string(),
        "--end", &(first + DAY).to_string(),
        "--now", &(first + 2 * DAY).to_string(),
    ]);
    assert_eq!(health["completeness"], 0.75, "{health}");
    eprintln!("criterion 11.7: PASS (NEM12 ingestion and completeness via CLI)");

    eprintln!("criterion 11: PASS (criteria 1, 4, 5, 7 through the CLI alone)");
}
