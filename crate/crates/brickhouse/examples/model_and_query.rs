//! Upload and publish a small HVAC model, then run a BRIQL query over it:
//! find every AHU transitively feeding a room, with the outside-air and
//! room temperature sensor points attached to each. Also shows the SPARQL
//! text the same query compiles to.
//!
//! Run with: `cargo run --example model_and_query`

use brickhouse::directory::{Role, Scope};
use brickhouse::{Platform, QueryRef};

const MODEL: &str = include_str!("../fixtures/figure2_hvac.ttl");
const QUERY: &str = include_str!("../fixtures/example_query.briql.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let platform = Platform::new();
    platform
        .directory
        .add_grant("demo", Scope::Platform, Role::Admin);

    let org = platform.directory.create_org("Demo Org", "demo")?;
    let site = platform
        .directory
        .create_site(&org, "Demo Campus", -35.3, 149.1, "1 Example St", None, "demo")?;

    let draft = platform.upload_draft(&site, MODEL, "demo")?;
    let report = platform.validate_model(&site, draft.version)?;
    println!(
        "validation: {} error(s), {} warning(s)",
        report.error_count(),
        report.warning_count()
    );
    platform.publish_model(&site, draft.version, "demo")?;

    let response = platform.invoke_query(
        &QueryRef::Inline(QUERY.to_string()),
        std::slice::from_ref(&site),
        &Default::default(),
        "demo",
    )?;
    println!("\n{} solution(s):", response.solutions.len());
    for row in &response.solutions {
        let ahu = &response.entities[row["ahu"]];
        let room = &response.entities[row["room"]];
        let point = |e: &brickhouse::briql::EntityRecord| {
            e.points
                .as_ref()
                .and_then(|p| p.first())
                .map(|p| p.id.local_name().to_string())
                .unwrap_or_default()
        };
        println!(
            "  {} ({}) feeds {} ({})",
            ahu.id.local_name(),
            point(ahu),
            room.id.local_name(),
            point(room),
        );
    }

    println!("\ncompiled SPARQL:\n{}", platform.compile_sparql(QUERY)?);
    Ok(())
}
