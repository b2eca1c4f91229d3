//! Black-box access to a verifier: the simulator sees channel calls and
//! nothing else.

use rand::{Rng, RngCore};

use super::channel::{run_verifier_channel, Entry, Exit, Verifier, CHANNELS};
use crate::error::{Error, Result};
use crate::protocol::{Endpoint, PartyStep, ProtocolMsg};
use crate::qsim::QState;

/// One recorded call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRecord {
    pub channel: usize,
    pub non_abort: bool,
}

pub struct ChannelOracle {
    verifier: Box<dyn Verifier>,
    width: usize,
    log: Vec<CallRecord>,
}

/// Wraps a verifier whose declared width must be `m`.
pub fn make_oracle(verifier: Box<dyn Verifier>, m: usize) -> Result<ChannelOracle> {
    if verifier.width() != m || m == 0 {
        return Err(Error::Dimension(format!(
            "verifier {} declares {} qubits, oracle built for {m}",
            verifier.name(),
            verifier.width()
        )));
    }
    Ok(ChannelOracle {
        verifier,
        width: m,
        log: vec![],
    })
}

impl ChannelOracle {
    /// Φ_i on (classical memory, incoming message, quantum register).
    pub fn call<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        memory: &[u8],
        incoming: Option<&ProtocolMsg>,
        q: QState,
        rng: &mut R,
    ) -> Result<(Exit, QState)> {
        let entry = Entry {
            memory: memory.to_vec(),
            incoming: incoming.cloned(),
            coins: rng.gen(),
        };
        let (exit, q) = run_verifier_channel(self.verifier.as_ref(), i, &entry, q, rng)?;
        self.log.push(CallRecord {
            channel: i,
            non_abort: exit.is_non_abort(),
        });
        Ok((exit, q))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn log(&self) -> &[CallRecord] {
        &self.log
    }

    pub fn call_counts(&self) -> [usize; CHANNELS] {
        let mut c = [0; CHANNELS];
        for r in &self.log {
            c[r.channel] += 1;
        }
        c
    }
}

/// A verifier run live against a prover: its register persists between
/// channels exactly as in a real execution.
pub struct LiveVerifier {
    oracle: ChannelOracle,
    memory: Vec<u8>,
    register: Option<QState>,
    channel: usize,
}

impl LiveVerifier {
    pub fn new(verifier: Box<dyn Verifier>, session_id: u64) -> Result<Self> {
        let m = verifier.width();
        let memory = verifier.initial_memory(session_id);
        let register = Some(verifier.advice());
        Ok(LiveVerifier {
            oracle: make_oracle(verifier, m)?,
            memory,
            register,
            channel: 0,
        })
    }

    pub fn register(&self) -> Option<&QState> {
        self.register.as_ref()
    }

    pub fn memory(&self) -> &[u8] {
        &self.memory
    }
}

impl Endpoint for LiveVerifier {
    fn next(&mut self, incoming: Option<&ProtocolMsg>, rng: &mut dyn RngCore) -> Result<PartyStep> {
        let q = self.register.take().ok_or_else(|| Error::Protocol {
            round: 2 * self.channel as u32,
            reason: "verifier register already consumed".into(),
        })?;
        let (exit, q) = self.oracle.call(self.channel, &self.memory, incoming, q, rng)?;
        self.channel += 1;
        self.memory = exit.memory;
        self.register = Some(q);
        Ok(exit.step)
    }
}
