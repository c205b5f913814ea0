//! Effectful iterative equations over coalgebras with free finitely generated
//! carriers.
//!
//! The crate is organised bottom-up:
//!
//! * [`variety`]: finitary monads as varieties, free algebras, coproducts;
//! * [`functor`]: behavior functor shapes, distributive laws and liftings;
//! * [`coalgebra`]: ffg-coalgebras, determinization, behavioral equivalence;
//! * [`equation`]: ffg-equations and the reparameterization/sequencing
//!   combinators;
//! * [`phi`]: executable fixed points built from ffg-coalgebras (eventually
//!   periodic streams and a bisimilarity backend);
//! * [`elgot`]: Elgot algebras, axiom checkers, Kleene solving, passages
//!   between parameterized and plain algebras, initial morphisms;
//! * [`dsl`]: the text format shared with the command line tool.

pub mod coalgebra;
pub mod dsl;
pub mod elgot;
pub mod equation;
pub mod error;
pub mod functor;
pub mod phi;
pub mod variety;

pub use error::{Error, Result};
pub use variety::{Algebra, Carrier, FreeElem, Term, Variety};
