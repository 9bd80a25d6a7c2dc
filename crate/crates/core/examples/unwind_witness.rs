//! Unwinds a four-cycle containing an edge and checks the cycle trichotomy.

use std::sync::Arc;

use eppa::verify::verify_unwind_property;
use eppa::witness::unwind::{induced_cycles, UnwoundWitness};
use eppa::witness::{SearchWitness, Witness};
use eppa::{Language, Limits, StructureBuilder};

fn main() -> eppa::Result<()> {
    let lang = Arc::new(Language::graph());
    let mut b = StructureBuilder::numbered(lang.clone(), 2);
    b.add_edge(0, 0, 1);
    let k2 = b.build()?;
    let mut b = StructureBuilder::numbered(lang, 4);
    for i in 0..4 {
        b.add_edge(0, i, (i + 1) % 4);
    }
    let c4 = b.build()?;

    let limits = Limits::default();
    let base = Arc::new(SearchWitness::new(k2, c4.clone(), vec![0, 1], limits)?);
    let w = UnwoundWitness::build(base, "E", &limits)?;
    let f = w.projection().expect("projection to the base");
    let cycles = induced_cycles(w.structure(), 0, &limits)?;
    let longest = cycles.iter().map(Vec::len).max().unwrap_or(0);
    println!("|B| = {}, {} induced cycles, longest {longest}", w.structure().len(), cycles.len());

    let report = verify_unwind_property(w.structure(), &c4, f, 0, 6, 1_000, 1, &limits)?;
    println!("trichotomy {}: {:?}", report.pass, report.stats.outcomes);
    Ok(())
}
