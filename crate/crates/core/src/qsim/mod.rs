//! Exact simulator for the hybrid model: an M-qubit register driven by
//! unitary blocks, prefix measurements and classical post-processing.
//!
//! Pure states are amplitude vectors; mixed states are density matrices.
//! Channels accept either.

pub mod budget;
pub mod channel;
pub mod dump;
pub mod gate;
pub mod matrix;
pub mod state;

pub use budget::QubitBudget;
pub use channel::{
    channel_branches, replay_channel, run_block, run_channel, Branch, ChannelOutcome,
    HybridState, PostProcess, Step, DEFAULT_MAX_BLOCKS,
};
pub use dump::{dump_qst1, load_qst1};
pub use gate::{Circuit, Gate, UnitaryDescriptor};
pub use matrix::{CMatrix, C64};
pub use state::{
    apply_unitary, maximally_mixed, measure_prefix, measure_prefix_forced, povm_prob, Effect,
    QState,
};
