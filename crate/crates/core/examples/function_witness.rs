//! Witness for a structure with a unary function: each vertex carries a
//! valuation structure describing its closure.

use std::sync::Arc;

use eppa::language::RelationSymbol;
use eppa::verify::{verify_coherence, verify_eppa_witness};
use eppa::witness::functions::FunctionWitness;
use eppa::witness::Witness;
use eppa::{Language, Limits, StructureBuilder};

fn main() -> eppa::Result<()> {
    let lang = Language::new(vec![RelationSymbol { name: "R".into(), arity: 2 }], vec!["F".into()], vec![])?;
    let mut b = StructureBuilder::numbered(Arc::new(lang), 2);
    b.add_tuple(0, &[0, 1]).add_function_value(0, 0, 1);
    let a = b.build()?;

    let limits = Limits::default();
    let w = FunctionWitness::build(&a, &limits)?;
    let top = w.embedding()[0];
    println!("|B| = {}, closure of ψ(1) has {} vertices", w.structure().len(), w.valuation(top).vertices.len());

    let eppa = verify_eppa_witness(&a, w.structure(), w.embedding(), Some(&w), &limits)?;
    let coherent = verify_coherence(&a, w.structure(), w.embedding(), &w, &limits)?;
    println!("EPPA {} over {} maps, coherent {}", eppa.pass, eppa.stats.checked, coherent.pass);
    Ok(())
}
