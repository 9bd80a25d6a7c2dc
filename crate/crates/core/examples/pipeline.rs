//! The full pipeline for an edge: complete auxiliary edge, faithful layer,
//! unwinding rounds, then certificates that small substructures are tree-like.

use std::sync::Arc;

use eppa::pipeline::{build_pipeline_witness, unwinding_rounds, TreeCertificateSummary};
use eppa::verify::{verify_eppa_witness, verify_faithfulness};
use eppa::witness::{SearchWitness, Witness};
use eppa::{Language, Limits, StructureBuilder};

fn main() -> eppa::Result<()> {
    let mut b = StructureBuilder::numbered(Arc::new(Language::graph()), 2);
    b.add_edge(0, 0, 1);
    let k2 = b.build()?;

    let limits = Limits::default();
    let n = 2;
    let w = build_pipeline_witness(Arc::new(SearchWitness::trivial(k2.clone(), limits)), n, &limits)?;
    println!("n = {n}: {} rounds (formula gives {}), {} stages", w.rounds(), unwinding_rounds(n), w.stages().len());

    let eppa = verify_eppa_witness(&k2, w.structure(), w.embedding(), Some(&w), &limits)?;
    let faithful = verify_faithfulness(&k2, w.structure(), w.embedding(), &limits)?;
    println!("EPPA {}, faithful {}", eppa.pass, faithful.pass);

    if let Some(cert) = w.certify_tree_substructure(&[0, 1], &limits)? {
        let summary = TreeCertificateSummary::from(&cert);
        println!("{}", serde_json::to_string(&summary).expect("serializes"));
    }
    Ok(())
}
