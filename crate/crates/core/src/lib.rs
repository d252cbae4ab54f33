//! Random walks on the symmetric group driven by a conjugacy class.

pub mod class_chain;
pub mod cli;
pub mod coupling;
pub mod error;
pub mod hypergraph;
pub mod pd;
pub mod perm;
pub mod plot;
pub mod seed;
pub mod theta;
pub mod walk;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use perm::{ConjClassSpec, CycleType, Permutation};
