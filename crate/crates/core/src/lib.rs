//! Exact Boolean-valued models over finite complete Boolean algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`boolalg`]: events, lattice operations and partitions of unity.
//! * [`bvm`]: names of the Boolean-valued universe, atomic truth values,
//!   mixing, descent and function lifting.
//! * [`folang`]: a bounded-quantifier first-order language over names, its
//!   parser, evaluator and finite-pool maximum witnesses.
//! * [`lzero`]: atom-indexed random variables and the correspondence with
//!   scalar-valued names.
//! * [`condset`]: conditional sets in the step-function model.
//! * [`lmod`]: stable polytopes, separation certificates, Fenchel
//!   conjugates, subgradients, stable sequences and entropic risk.
//! * [`selftest`]: seeded invariant suites shared by the command line tool.

pub mod boolalg;
pub mod bvm;
pub mod condset;
pub mod error;
pub mod folang;
pub mod lmod;
pub mod lzero;
pub mod rational;
pub mod selftest;

pub use error::{Classify, ErrorClass};
