//! Malicious and desk-scale provers.

use rand::Rng;

use crate::error::Result;
use crate::protocol::{ProverState, ProverStrategy};
use crate::wi::Graph;

/// Commits a random (i, g) as c** and wins iff g = α_{i,0} ⊕ α_{i,1}.
pub fn guessing_prover<R: Rng + ?Sized>(
    session_id: u64,
    x: &Graph,
    lambda: usize,
    t: u32,
    rng: &mut R,
) -> Result<ProverState> {
    ProverState::new(session_id, x.clone(), lambda, t, ProverStrategy::Guessing, rng)
}

/// Copies the verifier's unopened α commitments into c** without knowing
/// r*, then proves through the trapdoor branch.
pub fn mauling_prover<R: Rng + ?Sized>(
    session_id: u64,
    x: &Graph,
    lambda: usize,
    t: u32,
    rng: &mut R,
) -> Result<ProverState> {
    ProverState::new(session_id, x.clone(), lambda, t, ProverStrategy::Mauling, rng)
}

/// The straight-line policy's prover. Exhaustive search stands in for the
/// efficient decider the impossibility argument produces: on a
/// Hamiltonian x it proves honestly, otherwise it guesses.
pub fn decider_prover<R: Rng + ?Sized>(
    session_id: u64,
    x: &Graph,
    lambda: usize,
    t: u32,
    rng: &mut R,
) -> Result<ProverState> {
    let strategy = match x.find_hamiltonian_cycle() {
        Some(cycle) => ProverStrategy::Honest { cycle },
        None => ProverStrategy::Guessing,
    };
    ProverState::new(session_id, x.clone(), lambda, t, strategy, rng)
}
