//! Verifiers as sequences of hybrid channels Φ_0 … Φ_5.
//!
//! Φ_0 emits round 0; Φ_i for i ≥ 1 consumes prover round 2i−1 and emits
//! round 2i (Φ_5 emits the verdict). A channel starts from the classical
//! entry (memory, incoming message, coins) with ⟨U⟩ = I and ℓ = 0; the
//! verifier's post-processing then schedules its own unitary blocks.

use bincode::Options;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::protocol::{PartyStep, ProtocolMsg, VerifierState};
use crate::qsim::{
    channel_branches, run_channel, Branch, HybridState, QState, Step, UnitaryDescriptor, DEFAULT_MAX_BLOCKS,
};

/// Number of channels of a verifier of the protocol.
pub const CHANNELS: usize = 6;

/// Channel that consumes prover round `r`.
pub fn channel_of_round(r: u32) -> usize {
    r.div_ceil(2) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub memory: Vec<u8>,
    pub incoming: Option<ProtocolMsg>,
    /// Classical randomness of this call; post-processing stays pure.
    pub coins: u64,
}

impl Entry {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.coins)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exit {
    pub memory: Vec<u8>,
    pub step: PartyStep,
}

impl Exit {
    /// True when the channel emitted an ordinary protocol message.
    pub fn is_non_abort(&self) -> bool {
        match &self.step {
            PartyStep::Send(m) => !m.payload.is_terminal(),
            PartyStep::Done(v) => v.abort_step().is_none(),
        }
    }
}

pub enum Block {
    /// Apply `unitary`, measure the first `measure` qubits, then resume
    /// with `tape`.
    Quantum {
        tape: Vec<u8>,
        unitary: UnitaryDescriptor,
        measure: usize,
    },
    Exit(Exit),
}

/// A malicious or honest verifier, described channel by channel.
pub trait Verifier: Send + Sync {
    fn name(&self) -> String;
    /// Qubit width M.
    fn width(&self) -> usize;
    fn advice(&self) -> QState;
    fn initial_memory(&self, session_id: u64) -> Vec<u8>;
    /// Number of leading challenge bits the abort decision of Φ_2 reads.
    fn challenge_dependence(&self) -> usize {
        usize::MAX
    }
    fn start(&self, channel: usize, entry: &Entry) -> Result<Block>;
    fn resume(&self, channel: usize, tape: &[u8], outcome: &Bits) -> Result<Block> {
        let _ = (tape, outcome);
        Err(Error::Postprocess(format!("channel {channel} has no quantum step")))
    }
}

pub(crate) fn codec() -> impl Options {
    bincode::DefaultOptions::new().with_limit(1 << 28)
}

pub fn encode<T: Serialize>(v: &T) -> Vec<u8> {
    codec().serialize(v).expect("in-memory value serialises")
}

pub fn decode<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T> {
    codec().deserialize(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// One honest verifier step on an entry whose memory is a
/// [`VerifierState`].
pub fn honest_exit(entry: &Entry) -> Result<Exit> {
    let mut st = VerifierState::from_bytes(&entry.memory)?;
    let step = st.next(entry.incoming.as_ref(), &mut entry.rng())?;
    Ok(Exit {
        memory: st.to_bytes(),
        step,
    })
}

#[derive(Serialize, Deserialize)]
enum Tape {
    Start(Entry),
    Mid(Vec<u8>),
    Done(Exit),
}

fn to_step(b: Block) -> Step {
    match b {
        Block::Quantum { tape, unitary, measure } => Step {
            classical: encode(&Tape::Mid(tape)),
            unitary,
            measure_count: measure,
        },
        Block::Exit(e) => Step {
            classical: encode(&Tape::Done(e)),
            unitary: UnitaryDescriptor::Bottom,
            measure_count: 0,
        },
    }
}

fn start_state(v: &dyn Verifier, entry: &Entry, q: QState) -> Result<HybridState> {
    if q.num_qubits() != v.width() {
        return Err(Error::Dimension(format!(
            "{}-qubit register for a {}-qubit verifier",
            q.num_qubits(),
            v.width()
        )));
    }
    HybridState::new(encode(&Tape::Start(entry.clone())), UnitaryDescriptor::identity(v.width()), 0, q)
}

fn exit_of(classical: &[u8]) -> Result<Exit> {
    match decode::<Tape>(classical)? {
        Tape::Done(e) => Ok(e),
        _ => Err(Error::Postprocess("channel halted without an exit".into())),
    }
}

fn with_post<T>(v: &dyn Verifier, channel: usize, run: impl FnOnce(&crate::qsim::PostProcess<'_>) -> T) -> T {
    let f = move |c: &[u8], _u: &UnitaryDescriptor, _l: usize, o: &Bits| -> Result<Step> {
        match decode::<Tape>(c)? {
            Tape::Start(e) => Ok(to_step(v.start(channel, &e)?)),
            Tape::Mid(t) => Ok(to_step(v.resume(channel, &t, o)?)),
            Tape::Done(_) => Err(Error::Postprocess("block after exit".into())),
        }
    };
    run(&f)
}

/// Runs Φ_channel on (entry, q).
pub fn run_verifier_channel<R: Rng + ?Sized>(
    v: &dyn Verifier,
    channel: usize,
    entry: &Entry,
    q: QState,
    rng: &mut R,
) -> Result<(Exit, QState)> {
    if channel >= CHANNELS {
        return Err(Error::Config(format!("no channel {channel}")));
    }
    let hs = start_state(v, entry, q)?;
    let out = with_post(v, channel, |f| run_channel(hs, f, rng, DEFAULT_MAX_BLOCKS))?;
    Ok((exit_of(&out.classical)?, out.quantum))
}

/// Every measurement branch of Φ_channel on a (possibly non-physical)
/// operator, with its exit.
pub fn verifier_channel_branches(
    v: &dyn Verifier,
    channel: usize,
    entry: &Entry,
    op: QState,
) -> Result<Vec<(Exit, Branch)>> {
    let hs = start_state(v, entry, op)?;
    let branches = with_post(v, channel, |f| channel_branches(hs, f, DEFAULT_MAX_BLOCKS))?;
    branches.into_iter().map(|b| Ok((exit_of(&b.classical)?, b))).collect()
}
