//! Quantum jamming in kinetically constrained spin-1/2 chains.
//!
//! The crate implements the multispecies particle-hole duality between
//! jammed spin chains and pseudospin configurations, evolves one- and
//! two-impurity sectors, evaluates two-impurity Bethe Ansatz asymptotics and
//! checks everything against brute-force exact diagonalization.

pub mod bethe;
pub mod cli;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod oracle;

pub use error::{Error, Result};
