//! The contrived verifier V′: the honest verifier wrapped so that every
//! round also demands the previous round's subspace state, and its
//! classical state travels encrypted and tagged.
//!
//! Registers: X carries the classical message, Y an n-qubit subspace
//! state, Z the ciphertext of the honest state, T its tag. Channel
//! Φ_i (1 ≤ i ≤ k) wraps honest verifier step i−1, so Φ_1 takes no
//! prover message and emits the first verifier round.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::crypto::{dec, enc, tag, tag_verify, SecretKey, SymKey, TagKey};
use crate::error::{Error, Result};
use crate::protocol::{PartyStep, ProtocolMsg, VerifierState};
use crate::qsim::QState;
use crate::simulator::CHANNELS;
use crate::subspace::{project_a, Subspace};

/// Largest subspace ambient dimension V′ is built with.
pub const MAX_N: usize = 10;

/// One query to Φ_i with X, Z, T already measured.
#[derive(Debug, Clone)]
pub struct VQuery {
    pub x: Option<ProtocolMsg>,
    pub y: QState,
    pub z: Vec<u8>,
    pub t: Bits,
}

#[derive(Debug, Clone)]
pub enum VAnswer {
    Abort,
    Reply {
        x: PartyStep,
        y: QState,
        z: Vec<u8>,
        t: Bits,
    },
}

impl VAnswer {
    pub fn is_abort(&self) -> bool {
        matches!(self, VAnswer::Abort)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub channel: usize,
    /// Passed the subspace check on Y.
    pub state_successful: bool,
    pub non_abort: bool,
    pub timestamp: u64,
    pub z_in: Vec<u8>,
    pub z_out: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLog {
    records: Vec<QueryRecord>,
}

impl QueryLog {
    /// Appends a record stamped with its position.
    pub fn push(&mut self, channel: usize, state_successful: bool, z_in: &[u8], z_out: Option<Vec<u8>>) -> usize {
        let non_abort = z_out.is_some();
        assert!(!non_abort || state_successful, "a non-abort query must be state-successful");
        self.records.push(QueryRecord {
            channel,
            state_successful,
            non_abort,
            timestamp: self.records.len() as u64,
            z_in: z_in.to_vec(),
            z_out,
        });
        self.records.len() - 1
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Anything that answers queries to Φ_1 … Φ_k: V′ itself or the extracted
/// prover impersonating it.
pub trait ContrivedOracle {
    fn rounds(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn query(&mut self, i: usize, q: VQuery, rng: &mut dyn RngCore) -> Result<VAnswer>;
    fn log(&self) -> &QueryLog;
}

pub(crate) fn check_shape(k: usize, n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 || n > MAX_N {
        return Err(Error::Config(format!("subspace dimension n = {n} must be even and at most {MAX_N}")));
    }
    if k == 0 || k > CHANNELS {
        return Err(Error::Config(format!("V′ wraps 1..={CHANNELS} verifier steps, got {k}")));
    }
    Ok(())
}

/// S_0 … S_k, each n/2-dimensional in F₂ⁿ.
pub(crate) fn sample_chain(k: usize, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Subspace>> {
    (0..=k).map(|_| Subspace::sample(n, n / 2, rng)).collect()
}

pub(crate) fn keys(lambda: usize, rng: &mut dyn RngCore) -> Result<(SymKey, TagKey)> {
    Ok((SecretKey::generate(lambda, rng)?, SecretKey::generate(lambda, rng)?))
}

pub(crate) fn check_y(n: usize, y: &QState) -> Result<()> {
    if y.num_qubits() != n {
        return Err(Error::Dimension(format!("{}-qubit Y for n = {n}", y.num_qubits())));
    }
    Ok(())
}

pub struct ContrivedVerifier {
    k: usize,
    n: usize,
    subspaces: Vec<Subspace>,
    sk_enc: SymKey,
    tag_key: TagKey,
    /// γ_0: the wrapped verifier before its first step.
    initial: Vec<u8>,
    log: QueryLog,
}

/// V′ over `honest` with fresh subspaces and keys at the honest
/// verifier's security parameter.
pub fn build_contrived_verifier(
    k: usize,
    n: usize,
    honest: &VerifierState,
    rng: &mut dyn RngCore,
) -> Result<ContrivedVerifier> {
    check_shape(k, n)?;
    let subspaces = sample_chain(k, n, rng)?;
    let (sk_enc, tag_key) = keys(honest.lambda(), rng)?;
    Ok(ContrivedVerifier {
        k,
        n,
        subspaces,
        sk_enc,
        tag_key,
        initial: honest.to_bytes(),
        log: QueryLog::default(),
    })
}

impl ContrivedVerifier {
    /// V′'s advice |S_0⟩.
    pub fn advice(&self) -> QState {
        self.subspaces[0].prepare_state()
    }

    pub fn subspace(&self, i: usize) -> &Subspace {
        &self.subspaces[i]
    }

    fn run(&self, i: usize, q: &VQuery, rng: &mut dyn RngCore) -> Result<Option<(PartyStep, Vec<u8>)>> {
        let gamma = if i == 1 {
            self.initial.clone()
        } else {
            if !tag_verify(&self.tag_key, &q.z, &q.t) {
                return Ok(None);
            }
            let Ok(g) = dec(&self.sk_enc, &q.z) else {
                return Ok(None);
            };
            g
        };
        let Ok(mut st) = VerifierState::from_bytes(&gamma) else {
            return Ok(None);
        };
        match st.next(q.x.as_ref(), rng) {
            Ok(step) => Ok(Some((step, st.to_bytes()))),
            // the wrapped verifier refuses the message: V′ aborts
            Err(_) => Ok(None),
        }
    }
}

impl ContrivedOracle for ContrivedVerifier {
    fn rounds(&self) -> usize {
        self.k
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn query(&mut self, i: usize, q: VQuery, rng: &mut dyn RngCore) -> Result<VAnswer> {
        if i == 0 || i > self.k {
            return Err(Error::Config(format!("V′ has channels 1..={}", self.k)));
        }
        check_y(self.n, &q.y)?;
        let (outcome, _) = project_a(&self.subspaces[i - 1], &q.y, rng)?;
        if outcome == 1 {
            self.log.push(i, false, &q.z, None);
            return Ok(VAnswer::Abort);
        }
        let Some((step, gamma)) = self.run(i, &q, rng)? else {
            self.log.push(i, true, &q.z, None);
            return Ok(VAnswer::Abort);
        };
        let c = enc(&self.sk_enc, &gamma, rng);
        let t = tag(&self.tag_key, &c);
        self.log.push(i, true, &q.z, Some(c.clone()));
        Ok(VAnswer::Reply {
            x: step,
            y: self.subspaces[i].prepare_state(),
            z: c,
            t,
        })
    }

    fn log(&self) -> &QueryLog {
        &self.log
    }
}
