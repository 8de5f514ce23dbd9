//! Discover the metering hierarchy of a campus model: supply roots,
//! behind-the-meter generation, the site-level net-consumption expression,
//! per-building expressions, and the diagnostics for anything that cannot
//! be attributed cleanly. Then select the best data channel per meter.
//!
//! Run with: `cargo run --example meter_discovery`

use brickhouse::graph::GraphStore;
use brickhouse::mv::{discover_metering, select_meter_point};
use brickhouse::ontology::Ontology;
use brickhouse::rdf::{parse_turtle, Iri};

const MODEL: &str = include_str!("../fixtures/figure4_metering.ttl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = GraphStore::new(Ontology::shipped());
    let graph_id = Iri::new("model:campus")?;
    store.create_graph(graph_id.clone())?;
    store.assert_triples(&graph_id, &parse_turtle(MODEL)?)?;
    let graph = store.snapshot(&graph_id)?;

    let discovery = discover_metering(&graph, store.ontology())?;

    let label = |iri: &Iri| {
        graph
            .label_of(iri)
            .unwrap_or_else(|| iri.local_name().to_string())
    };
    let render = |terms: &[brickhouse::mv::SignedMeter]| -> String {
        terms
            .iter()
            .map(|t| {
                let sign = match t.sign {
                    brickhouse::mv::Sign::Plus => '+',
                    brickhouse::mv::Sign::Minus => '-',
                };
                format!("{sign}{}", label(&t.meter))
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    println!("supply roots: {:?}", discovery.roots.iter().map(&label).collect::<Vec<_>>());
    println!(
        "generation meters: {:?}",
        discovery.generation_meters.iter().map(&label).collect::<Vec<_>>()
    );
    println!("\nsite consumption = {}", render(&discovery.site_terms));
    for (building, terms) in &discovery.building_terms {
        println!("{} consumption = {}", label(building), render(terms));
    }

    println!("\ndiagnostics:");
    for d in &discovery.diagnostics {
        println!("  - {d}");
    }

    println!("\nselected data channels:");
    for term in &discovery.site_terms {
        let selection = select_meter_point(&graph, store.ontology(), &term.meter)?;
        println!(
            "  {}: {:?} via {:?}{}",
            label(&term.meter),
            selection.kind,
            selection.streams,
            if selection.phase_sum { " (sum of phases)" } else { "" },
        );
    }
    Ok(())
}
