//! Desk-scale laboratory for space-bounded quantum zero knowledge.
//!
//! The crate bundles an exact hybrid classical/quantum simulator, subspace
//! states, toy commitments, a witness-indistinguishable proof, the trapdoor
//! protocol with its maximally-mixed rewinding simulator, an adversary zoo
//! with the contrived-verifier apparatus, and an experiment harness.

pub mod adversary;
pub mod bits;
pub mod crypto;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod qsim;
pub mod simulator;
pub mod subspace;
pub mod wi;

pub use bits::Bits;
pub use error::{Error, Result};
