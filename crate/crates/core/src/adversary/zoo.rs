//! Malicious verifiers of the protocol, each a hybrid channel sequence on
//! top of the honest verifier's classical state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::protocol::{step_of_round, PartyStep, Payload, ProtocolMsg, VerifierState};
use crate::qsim::{CMatrix, Circuit, Gate, QState, UnitaryDescriptor, C64};
use crate::simulator::{channel, honest_exit, Block, Entry, Exit, Verifier};
use crate::wi::Graph;

/// Largest width of a zoo verifier with a dense random unitary.
pub const MAX_RANDOM_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZooKind {
    Honest,
    /// Aborts at step 4 whatever it receives.
    AlwaysAbort,
    /// Honest classical behaviour; the register is never touched.
    NeverAbort,
    /// Aborts at step 4 iff challenge bit `watch` equals `abort_on`.
    BitConditional { watch: usize, abort_on: bool },
    /// Advice (cos θ|0⟩ + sin θ|1⟩)^{⊗M}; at step 4 measures the first
    /// `measured` qubits and aborts iff any reads 1.
    QuantumCoin { theta: f64, measured: usize },
    /// Advice |+⟩; at step 6 measures qubit 0 and aborts iff it reads 1.
    DelayedAbort,
}

impl ZooKind {
    pub fn name(&self) -> String {
        match self {
            ZooKind::Honest => "honest".into(),
            ZooKind::AlwaysAbort => "always-abort".into(),
            ZooKind::NeverAbort => "never-abort".into(),
            ZooKind::BitConditional { watch, abort_on } => format!("bit-conditional[{watch}={}]", *abort_on as u8),
            ZooKind::QuantumCoin { theta, measured } => {
                format!("quantum-coin[cos2={:.3},w={measured}]", theta.cos().powi(2))
            }
            ZooKind::DelayedAbort => "delayed-abort".into(),
        }
    }

    /// Angle with cos²θ = `p`.
    pub fn coin_with_cos2(p: f64, measured: usize) -> ZooKind {
        ZooKind::QuantumCoin {
            theta: p.clamp(0.0, 1.0).sqrt().acos(),
            measured,
        }
    }
}

/// A zoo member bound to a statement and protocol parameters.
#[derive(Debug, Clone)]
pub struct ZooVerifier {
    pub kind: ZooKind,
    width: usize,
    graph: Graph,
    lambda: usize,
    t: u32,
}

impl ZooVerifier {
    pub fn new(kind: ZooKind, width: usize, graph: Graph, lambda: usize, t: u32) -> Result<Self> {
        let need = match &kind {
            ZooKind::QuantumCoin { measured, .. } => (*measured).max(1),
            _ => 1,
        };
        if width < need {
            return Err(Error::Dimension(format!("{} needs {need} qubits, got {width}", kind.name())));
        }
        Ok(ZooVerifier {
            kind,
            width,
            graph,
            lambda,
            t,
        })
    }

    /// Exact probability of not aborting at step 4 against a prover whose
    /// challenge is uniform.
    pub fn predicted_p(&self) -> f64 {
        match &self.kind {
            ZooKind::AlwaysAbort => 0.0,
            ZooKind::BitConditional { .. } => 0.5,
            ZooKind::QuantumCoin { theta, measured } => theta.cos().powi(2 * *measured as i32),
            _ => 1.0,
        }
    }

    /// Exact lookahead success probability on I/2^M averaged over b.
    pub fn predicted_p_prime(&self) -> f64 {
        let miss = 0.5f64.powi(self.lambda as i32);
        match &self.kind {
            ZooKind::AlwaysAbort => 0.0,
            // b′ must hit the accepting half and differ from b
            ZooKind::BitConditional { .. } => 0.5 - 0.5 * miss,
            ZooKind::QuantumCoin { measured, .. } => 0.5f64.powi(*measured as i32) * (1.0 - miss),
            _ => 1.0 - miss,
        }
    }
}

/// Abort at the round channel `ch` would emit.
pub fn abort_exit(entry: &Entry, ch: usize) -> Result<Exit> {
    let st = VerifierState::from_bytes(&entry.memory)?;
    let r = 2 * ch as u32;
    Ok(Exit {
        memory: entry.memory.clone(),
        step: PartyStep::Send(ProtocolMsg::new(
            st.session_id(),
            r,
            Payload::Abort {
                step: step_of_round(r),
            },
        )),
    })
}

fn challenge_bit(entry: &Entry, i: usize) -> Result<bool> {
    match entry.incoming.as_ref().map(|m| &m.payload) {
        Some(Payload::Challenge { bits }) if i < bits.len() => Ok(bits.get(i)),
        _ => Err(Error::Postprocess("expected the challenge".into())),
    }
}

fn measure_block(entry: &Entry, m: usize, k: usize) -> Block {
    Block::Quantum {
        tape: channel::encode(entry),
        unitary: UnitaryDescriptor::identity(m),
        measure: k,
    }
}

impl Verifier for ZooVerifier {
    fn name(&self) -> String {
        self.kind.name()
    }

    fn width(&self) -> usize {
        self.width
    }

    fn advice(&self) -> QState {
        let m = self.width;
        match &self.kind {
            ZooKind::QuantumCoin { theta, .. } => {
                let (s, c) = theta.sin_cos();
                let amps = (0..1usize << m)
                    .map(|x| {
                        let ones = x.count_ones() as i32;
                        C64::new(s.powi(ones) * c.powi(m as i32 - ones), 0.0)
                    })
                    .collect();
                QState::normalized(amps).expect("nonzero product state")
            }
            ZooKind::DelayedAbort => {
                let mut amps = vec![C64::new(0.0, 0.0); 1 << m];
                let h = std::f64::consts::FRAC_1_SQRT_2;
                amps[0] = C64::new(h, 0.0);
                amps[1 << (m - 1)] = C64::new(h, 0.0);
                QState::from_amplitudes(amps).expect("unit vector")
            }
            _ => QState::zero(m),
        }
    }

    fn initial_memory(&self, session_id: u64) -> Vec<u8> {
        VerifierState::new(session_id, self.graph.clone(), self.lambda, self.t)
            .expect("zoo parameters validated by the caller")
            .to_bytes()
    }

    fn challenge_dependence(&self) -> usize {
        match &self.kind {
            ZooKind::BitConditional { watch, .. } => watch + 1,
            _ => 0,
        }
    }

    fn start(&self, ch: usize, entry: &Entry) -> Result<Block> {
        match (&self.kind, ch) {
            (ZooKind::AlwaysAbort, 2) => Ok(Block::Exit(abort_exit(entry, ch)?)),
            (ZooKind::BitConditional { watch, abort_on }, 2) => {
                if challenge_bit(entry, *watch)? == *abort_on {
                    Ok(Block::Exit(abort_exit(entry, ch)?))
                } else {
                    Ok(Block::Exit(honest_exit(entry)?))
                }
            }
            (ZooKind::QuantumCoin { measured, .. }, 2) => Ok(measure_block(entry, self.width, *measured)),
            (ZooKind::DelayedAbort, 3) => Ok(measure_block(entry, self.width, 1)),
            _ => Ok(Block::Exit(honest_exit(entry)?)),
        }
    }

    fn resume(&self, ch: usize, tape: &[u8], outcome: &Bits) -> Result<Block> {
        let entry: Entry = channel::decode(tape)?;
        if outcome.is_zero() {
            Ok(Block::Exit(honest_exit(&entry)?))
        } else {
            Ok(Block::Exit(abort_exit(&entry, ch)?))
        }
    }
}

/// The zoo at desk parameters: every member has M ≤ 3.
pub fn build_zoo(graph: &Graph, lambda: usize, t: u32) -> Result<Vec<ZooVerifier>> {
    [
        (ZooKind::Honest, 1),
        (ZooKind::AlwaysAbort, 1),
        (ZooKind::NeverAbort, 2),
        (
            ZooKind::BitConditional {
                watch: 0,
                abort_on: true,
            },
            1,
        ),
        (ZooKind::coin_with_cos2(0.7, 1), 3),
        (ZooKind::DelayedAbort, 1),
    ]
    .into_iter()
    .map(|(k, m)| ZooVerifier::new(k, m, graph.clone(), lambda, t))
    .collect()
}

/// Zoo member by CLI name: honest, always-abort, never-abort,
/// bit-conditional, quantum-coin, delayed-abort.
pub fn zoo_by_name(name: &str, width: usize, graph: &Graph, lambda: usize, t: u32) -> Result<ZooVerifier> {
    let kind = match name {
        "honest" => ZooKind::Honest,
        "always-abort" => ZooKind::AlwaysAbort,
        "never-abort" => ZooKind::NeverAbort,
        "bit-conditional" => ZooKind::BitConditional {
            watch: 0,
            abort_on: true,
        },
        "quantum-coin" => ZooKind::coin_with_cos2(0.7, 1),
        "delayed-abort" => ZooKind::DelayedAbort,
        _ => return Err(Error::Config(format!("unknown verifier {name:?}"))),
    };
    ZooVerifier::new(kind, width, graph.clone(), lambda, t)
}

/// Random M-qubit verifier: random pure advice, a random unitary at
/// step 2, then at step 4 one of two random unitaries selected by b_0,
/// a full measurement, and an abort unless the outcome lies in a random
/// nonempty accepting set.
#[derive(Debug, Clone)]
pub struct RandomVerifier {
    width: usize,
    advice: Vec<C64>,
    u1: CMatrix,
    u2: [CMatrix; 2],
    accept: Vec<bool>,
    graph: Graph,
    lambda: usize,
    t: u32,
}

impl RandomVerifier {
    pub fn sample<R: Rng + ?Sized>(m: usize, graph: Graph, lambda: usize, t: u32, rng: &mut R) -> Result<Self> {
        if m == 0 || m > MAX_RANDOM_WIDTH {
            return Err(Error::Dimension(format!("random verifiers have 1..={MAX_RANDOM_WIDTH} qubits")));
        }
        let d = 1usize << m;
        let advice = CMatrix::random_unitary(d, rng).mul_vec(&QState::zero(m).amplitudes().expect("pure").to_vec());
        let mut accept: Vec<bool> = (0..d).map(|_| rng.gen()).collect();
        if !accept.iter().any(|&a| a) {
            accept[rng.gen_range(0..d)] = true;
        }
        Ok(RandomVerifier {
            width: m,
            advice,
            u1: CMatrix::random_unitary(d, rng),
            u2: [CMatrix::random_unitary(d, rng), CMatrix::random_unitary(d, rng)],
            accept,
            graph,
            lambda,
            t,
        })
    }

    fn unitary(&self, u: &CMatrix) -> Result<UnitaryDescriptor> {
        let g = Gate::dense((0..self.width).collect(), u.clone())?;
        Ok(Circuit::from_gates(self.width, vec![g])?.into())
    }
}

impl Verifier for RandomVerifier {
    fn name(&self) -> String {
        format!("random[M={}]", self.width)
    }

    fn width(&self) -> usize {
        self.width
    }

    fn advice(&self) -> QState {
        QState::normalized(self.advice.clone()).expect("unit vector")
    }

    fn initial_memory(&self, session_id: u64) -> Vec<u8> {
        VerifierState::new(session_id, self.graph.clone(), self.lambda, self.t)
            .expect("parameters validated by the caller")
            .to_bytes()
    }

    fn challenge_dependence(&self) -> usize {
        1
    }

    fn start(&self, ch: usize, entry: &Entry) -> Result<Block> {
        match ch {
            1 => Ok(Block::Quantum {
                tape: channel::encode(entry),
                unitary: self.unitary(&self.u1)?,
                measure: 0,
            }),
            2 => Ok(Block::Quantum {
                tape: channel::encode(entry),
                unitary: self.unitary(&self.u2[challenge_bit(entry, 0)? as usize])?,
                measure: self.width,
            }),
            _ => Ok(Block::Exit(honest_exit(entry)?)),
        }
    }

    fn resume(&self, ch: usize, tape: &[u8], outcome: &Bits) -> Result<Block> {
        let entry: Entry = channel::decode(tape)?;
        // qubit 0 is the most significant bit of the basis index
        let x = (0..outcome.len()).fold(0usize, |acc, i| acc << 1 | outcome.get(i) as usize);
        if ch == 2 && !self.accept[x] {
            Ok(Block::Exit(abort_exit(&entry, ch)?))
        } else {
            Ok(Block::Exit(honest_exit(&entry)?))
        }
    }
}
