//! Witness-indistinguishable proofs.
//!
//! Two engines live here. [`blum`] is Blum's Hamiltonicity protocol over a
//! pluggable bit commitment, for graph statements. [`mpc`] proves
//! satisfiability of a Boolean circuit in the MPC-in-the-head style; the
//! protocol's WI phase runs it on the compound circuit of [`compound`],
//! whose trapdoor branch unrolls commitment openings into gates.

pub mod blum;
pub mod circuit;
pub mod compound;
pub mod graph;
pub mod mpc;
pub mod reduce;

pub use blum::{wi_prove, wi_verify, BitCommitScheme, BlumProver, IdealScheme, NaorScheme, WiTranscript};
pub use circuit::{BoolCircuit, Builder, GateOp, Lit};
pub use compound::{build_compound_circuit, index_bits, CompoundStatement, CompoundWitness, InputLayout};
pub use graph::Graph;
pub use mpc::{
    mpc_commit, mpc_commit_cheating, mpc_verify, mpc_verify_transcript, reps_for_soundness, MpcChallenge,
    MpcCommit, MpcProverState, MpcResponse, MpcTranscript,
};
pub use reduce::reduce_to_hamiltonicity;

/// Default soundness exponent of the WI phase.
pub const DEFAULT_T: u32 = 40;
