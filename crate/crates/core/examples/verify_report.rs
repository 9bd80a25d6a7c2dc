//! Brute-force verification of a structure that is not its own witness, with
//! the JSON report and its counterexample.

use std::sync::Arc;

use eppa::verify::{verify_eppa_witness, Counterexample};
use eppa::{Language, Limits, StructureBuilder};

fn main() -> eppa::Result<()> {
    let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), 3);
    b.add_edge(0, 0, 1).add_edge(0, 1, 2);
    let p3 = b.build()?;

    let report = verify_eppa_witness(&p3, &p3, &[0, 1, 2], None, &Limits::default())?;
    println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));

    // the counterexample replays
    if let Some(Counterexample::PartialAutomorphism { map, .. }) = &report.counterexample {
        let phi = map.to_morphism()?;
        let again = eppa::search::extend_to_automorphism(&p3, &phi, &Limits::default())?;
        println!("replayed: extension exists = {}", again.is_some());
    }
    Ok(())
}
