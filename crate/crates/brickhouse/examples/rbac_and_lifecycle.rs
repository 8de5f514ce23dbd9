//! Multi-tenant access control and model lifecycle: organisations own
//! sites and buildings, grants inherit down the scope chain and never
//! sideways, and a model moves draft → validated → published, after which
//! its graph is immutable.
//!
//! Run with: `cargo run --example rbac_and_lifecycle`

use brickhouse::directory::{Role, Scope};
use brickhouse::rdf::Triple;
use brickhouse::{Iri, Platform};

const MODEL: &str = include_str!("../fixtures/figure2_hvac.ttl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let platform = Platform::new();
    platform.directory.add_grant("root", Scope::Platform, Role::Admin);

    let acme = platform.directory.create_org("Acme Facilities", "root")?;
    let rivals = platform.directory.create_org("Rival Holdings", "root")?;
    let campus = platform
        .directory
        .create_site(&acme, "Acme Campus", -35.3, 149.1, "1 Example St", None, "root")?;

    // Alice models Acme's buildings; Bob can only read a rival org.
    platform.directory.add_grant("alice", Scope::Org(acme.clone()), Role::Modeler);
    platform.directory.add_grant("bob", Scope::Org(rivals.clone()), Role::Reader);

    println!(
        "alice may model Acme campus: {}",
        platform
            .directory
            .check_access("alice", &Scope::Site(campus.clone()), Role::Modeler)
    );
    println!(
        "bob may read Acme campus: {}",
        platform
            .directory
            .check_access("bob", &Scope::Site(campus.clone()), Role::Reader)
    );

    let draft = platform.upload_draft(&campus, MODEL, "alice")?;
    let report = platform.validate_model(&campus, draft.version)?;
    println!(
        "\ndraft v{}: {} validation error(s), {} warning(s)",
        draft.version,
        report.error_count(),
        report.warning_count()
    );

    let published = platform.publish_model(&campus, draft.version, "alice")?;
    println!("published v{} as graph {}", published.version, published.graph_id);

    // Published graphs reject writes, even from the modeler.
    let write = platform.graphs.assert_triples(
        &published.graph_id,
        &[Triple::new(
            Iri::new("urn:example:x")?,
            brickhouse::rdf::ns::brick("feeds"),
            Iri::new("urn:example:y")?,
        )],
    );
    println!("write to published graph: {:?}", write.err().map(|e| e.to_string()));

    // Bob's upload attempt on Acme's site is denied outright.
    let denied = platform.upload_draft(&campus, MODEL, "bob");
    println!("bob uploads to Acme campus: {:?}", denied.err().map(|e| e.to_string()));
    Ok(())
}
