//! Witness for a structure with a binary and a unary relation, and the flip
//! functions behind one extension.

use std::sync::Arc;

use eppa::witness::relational::{flip_parity_holds, RelationalWitness};
use eppa::witness::Witness;
use eppa::{Language, Limits, Morphism, StructureBuilder};

fn main() -> eppa::Result<()> {
    let lang = Arc::new(Language::relational(&[("R", 2), ("U", 1)]));
    let mut b = StructureBuilder::numbered(lang, 2);
    b.add_tuple(0, &[0, 1]).add_tuple(1, &[0]).add_tuple(1, &[1]);
    let a = b.build()?;

    let w = RelationalWitness::build(&a, &Limits::default())?;
    println!("|B| = {} ({} valuation bits per vertex)", w.structure().len(), w.layout().bits());

    let psi = w.embedding();
    let phi = Morphism::new(a.language().identity(), [(psi[1], psi[0])].into_iter().collect());
    let ext = w.extend_pa(&phi)?;
    for (r, f) in ext.flips.iter().enumerate() {
        println!("flip for relation {r}: arity {}, parity ok {}", f.arity, flip_parity_holds(f, a.len()));
    }
    Ok(())
}
