//! Glues triangles along edges and vertices, then recovers a gluing trace
//! from the bare graph.

use std::sync::Arc;

use eppa::tree::{decompose_tree_amalgamation, Decomposition, GluingStep, TreeAmalgamation};
use eppa::{Language, Limits, StructureBuilder};

fn main() -> eppa::Result<()> {
    let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), 3);
    b.add_edge(0, 0, 1).add_edge(0, 1, 2).add_edge(0, 0, 2);
    let triangle = b.build()?;

    let steps = [
        GluingStep { parent: 0, pairs: vec![(0, 1), (1, 2)] },
        GluingStep { parent: 1, pairs: vec![(0, 2)] },
        GluingStep { parent: 0, pairs: vec![] },
    ];
    let built = TreeAmalgamation::replay(&triangle, &steps)?;
    println!("{} copies, {} vertices", built.copies().len(), built.structure().len());

    match decompose_tree_amalgamation(built.structure(), &triangle, &Limits::default())? {
        Decomposition::Tree { trace, .. } => {
            for (i, s) in trace.steps().iter().enumerate() {
                println!("copy {} glued to copy {} over {:?}", i + 1, s.parent, s.pairs);
            }
        }
        Decomposition::Obstructed(o) => println!("not a tree amalgamation: {o:?}"),
    }

    let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), 4);
    for i in 0..4 {
        b.add_edge(0, i, (i + 1) % 4);
    }
    let mut e = StructureBuilder::numbered(Arc::new(Language::graph()), 2);
    e.add_edge(0, 0, 1);
    let verdict = decompose_tree_amalgamation(&b.build()?, &e.build()?, &Limits::default())?;
    println!("four-cycle: {verdict:?}");
    Ok(())
}
