//! The trapdoor protocol: message types, wire codec, the two parties'
//! state machines and session plumbing.
//!
//! Round map (even rounds V→P, odd rounds P→V):
//!
//! | round | content |
//! |---|---|
//! | 0 | receiver message for c* |
//! | 1 | c* = Com(r*), receiver message for the α commitments |
//! | 2 | commitments to α_{i,b}, i < λ, b ∈ {0,1} |
//! | 3 | challenge bits b_1 … b_λ |
//! | 4 | openings of α_{i,b_i}, receiver message for c** |
//! | 5 | c** = Com((i*, β); r*), the honest prover commits zeros |
//! | 6 | openings of α_{i,1−b_i}, receiver message for the WI views |
//! | 7–9 | WI commitment, challenge trits, response |

pub mod codec;
pub mod msg;
pub mod prover;
pub mod session;
pub mod verifier;

pub use codec::{decode_msg, encode_msg};
pub use msg::{round, step_of_round, Dir, Payload, ProtocolMsg, Verdict};
pub use prover::{open_alphas, ProverState, ProverStrategy};
pub use session::{replay_verify, run_session, Endpoint, SessionFailure, Transcript, Transport};
pub use verifier::{PartyStep, VerifierState};
