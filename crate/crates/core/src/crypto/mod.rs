//! Toy-parameterised classical primitives: PRG, Naor commitments with
//! message recovery, symmetric encryption and a keyed tag.
//!
//! None of this is secure at real parameters; λ ≤ 24 throughout.

pub mod commit;
pub mod prg;
pub mod sym;

pub use commit::{
    binding_exhaustive, check_lambda, commit_bit, commit_bits, commit_long, commit_random, commit_shared, open_long,
    recover_message, recover_message_shared, verify_open, verify_open_shared, Commitment,
    LongCommitment, LongOpening, Opening, ReceiverMsg, BindingCount, MAX_EXHAUSTIVE_LAMBDA, MAX_LAMBDA,
};
pub use prg::{prg_expand, prg_expand_u64, Arx};
pub use sym::{dec, enc, tag, tag_verify, SecretKey, SymKey, TagKey};
