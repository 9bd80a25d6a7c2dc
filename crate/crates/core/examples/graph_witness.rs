//! Builds the graph witness of a path on three vertices and extends a partial
//! automorphism of its copy of the path.

use std::sync::Arc;

use eppa::witness::graph::GraphWitness;
use eppa::witness::Witness;
use eppa::{check_morphism, Language, Limits, Morphism, MorphismKind, StructureBuilder};

fn main() -> eppa::Result<()> {
    let mut b = StructureBuilder::new(Arc::new(Language::graph()), vec!["a".into(), "b".into(), "c".into()]);
    b.add_edge(0, 0, 1).add_edge(0, 1, 2);
    let a = b.build()?;

    let w = GraphWitness::build(&a, &Limits::default())?;
    println!("|A| = {}, |B| = {}", a.len(), w.structure().len());

    // send the endpoint a to the middle vertex b; no automorphism of A does this
    let psi = w.embedding();
    let phi = Morphism::new(a.language().identity(), [(psi[0], psi[1])].into_iter().collect());
    let ext = w.extend_pa(&phi)?;
    check_morphism(&ext.theta, MorphismKind::Automorphism, w.structure(), w.structure()).expect("automorphism");
    println!("{} -> {}", w.structure().name(psi[0]), w.structure().name(ext.theta.get(psi[0]).unwrap()));
    Ok(())
}
