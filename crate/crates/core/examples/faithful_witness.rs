//! Makes the graph witness of a path faithful: every irreducible substructure
//! of the result can be moved into the copy of the path, so no triangle survives.

use std::sync::Arc;

use eppa::metric::check_free_amalgamation_membership;
use eppa::verify::verify_faithfulness;
use eppa::witness::faithful::FaithfulWitness;
use eppa::witness::graph::GraphWitness;
use eppa::witness::Witness;
use eppa::{Language, Limits, StructureBuilder};

fn main() -> eppa::Result<()> {
    let lang = Arc::new(Language::graph());
    let mut b = StructureBuilder::numbered(lang.clone(), 3);
    b.add_edge(0, 0, 1).add_edge(0, 1, 2);
    let p3 = b.build()?;
    let mut b = StructureBuilder::numbered(lang, 3);
    b.add_edge(0, 0, 1).add_edge(0, 1, 2).add_edge(0, 0, 2);
    let k3 = b.build()?;

    let limits = Limits::default();
    let base = GraphWitness::build(&p3, &limits)?;
    let bad = eppa::witness::faithful::enumerate_bad_irreducibles(base.structure(), base.embedding(), &limits)?;
    println!("graph witness: {} vertices, {} bad irreducible sets", base.structure().len(), bad.len());

    let w = FaithfulWitness::build(Arc::new(base), &limits)?;
    let report = verify_faithfulness(&p3, w.structure(), w.embedding(), &limits)?;
    let triangle_free = check_free_amalgamation_membership(&[k3], w.structure(), &limits)?;
    println!("faithful witness: {} vertices, faithful {}, triangle-free {triangle_free}", w.structure().len(), report.pass);
    Ok(())
}
