//! Coherent EPPA-witnesses for finite structures over languages with a
//! permutation group on the symbols, together with brute-force verifiers.

pub mod cli;
pub mod error;
pub mod format;
pub mod irreducible;
pub mod language;
pub mod limits;
pub mod metric;
pub mod morphism;
pub mod ordered;
pub mod pipeline;
pub mod search;
pub mod structure;
pub mod tree;
pub mod verify;
pub mod witness;

pub use error::{Error, Result};
pub use language::{GroupElement, Language, RelationSymbol};
pub use limits::Limits;
pub use morphism::{check_morphism, Morphism, MorphismKind, Violation};
pub use structure::{Structure, StructureBuilder};
