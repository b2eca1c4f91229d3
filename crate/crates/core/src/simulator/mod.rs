//! The space-bounded rewinding simulator and its accounting.
//!
//! Verifiers are reachable only through [`ChannelOracle::call`]. Sim keeps
//! the main-thread register X and borrows a second M-qubit register R for
//! each lookahead, so its peak usage is 2M.

pub mod bounds;
pub mod channel;
pub mod oracle;
pub mod sim;

pub use bounds::{bound_check, effect_from_traces, termination_tail, BoundReport, TailReport};
pub use channel::{channel_of_round, honest_exit, Block, Entry, Exit, Verifier, CHANNELS};
pub use oracle::{make_oracle, CallRecord, ChannelOracle, LiveVerifier};
pub use sim::{rewind_iterations, simulate, SimParams, SimView, DEFAULT_MAX_ITERS};
