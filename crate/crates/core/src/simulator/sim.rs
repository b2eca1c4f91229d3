//! The rewinding simulator. The main thread runs on register X; each
//! lookahead restarts Φ_2 from the main thread's classical state on a
//! fresh maximally mixed register R, which is discarded afterwards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::ChannelOracle;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::protocol::{open_alphas, round, PartyStep, Payload, ProtocolMsg, ProverState, ProverStrategy, Transcript, Verdict};
use crate::qsim::{maximally_mixed, QState, QubitBudget};
use crate::wi::Graph;

pub const DEFAULT_MAX_ITERS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimParams {
    pub lambda: usize,
    pub t: u32,
    pub max_iters: u64,
}

#[derive(Debug, Clone)]
pub struct SimView {
    pub transcript: Transcript,
    /// Verifier's final classical state.
    pub memory: Vec<u8>,
    /// Verifier's final register.
    pub register: QState,
    pub iteration_count: u64,
    pub peak_qubits: usize,
    /// Index whose two openings fed the trapdoor.
    pub istar: Option<usize>,
}

/// Main-thread bookkeeping.
struct Main<'a> {
    oracle: &'a mut ChannelOracle,
    memory: Vec<u8>,
    x: Option<QState>,
    messages: Vec<ProtocolMsg>,
    session_id: u64,
}

enum Reply {
    Msg(ProtocolMsg),
    Over(Verdict),
}

impl Main<'_> {
    fn call<R: Rng + ?Sized>(&mut self, i: usize, incoming: Option<ProtocolMsg>, rng: &mut R) -> Result<Reply> {
        if let Some(m) = &incoming {
            self.messages.push(m.clone());
        }
        let x = self.x.take().expect("register X present");
        let (exit, x) = self.oracle.call(i, &self.memory, incoming.as_ref(), x, rng)?;
        self.x = Some(x);
        self.memory = exit.memory;
        Ok(match exit.step {
            PartyStep::Done(v) => Reply::Over(v),
            PartyStep::Send(m) => {
                self.messages.push(m.clone());
                match &m.payload {
                    Payload::Abort { step } => Reply::Over(Verdict::Abort { step: *step }),
                    Payload::Reject { step, .. } => Reply::Over(Verdict::Reject { step: *step }),
                    _ => Reply::Msg(m),
                }
            }
        })
    }
}

/// The prover's answer, or its verdict; a rejection message is recorded.
fn prover_step<R: Rng + ?Sized>(
    p: &mut ProverState,
    m: &ProtocolMsg,
    record: &mut Vec<ProtocolMsg>,
    rng: &mut R,
) -> Result<std::result::Result<ProtocolMsg, Verdict>> {
    Ok(match p.next(m, rng)? {
        PartyStep::Send(out) => match &out.payload {
            Payload::Reject { step, .. } => {
                let v = Verdict::Reject { step: *step };
                record.push(out);
                Err(v)
            }
            _ => Ok(out),
        },
        PartyStep::Done(v) => Err(v),
    })
}

/// Runs Sim against the oracle. A verifier abort on the main thread ends
/// the simulation with that abort, exactly as a real session would.
pub fn simulate<R: Rng + ?Sized>(
    x: &Graph,
    params: SimParams,
    oracle: &mut ChannelOracle,
    advice: QState,
    st0: Vec<u8>,
    rng: &mut R,
) -> Result<SimView> {
    run(x, params, oracle, advice, st0, rng, true)
}

/// Only steps 1–2: the number of lookahead iterations, or `None` when
/// the main thread ends before the loop.
pub fn rewind_iterations<R: Rng + ?Sized>(
    x: &Graph,
    params: SimParams,
    oracle: &mut ChannelOracle,
    advice: QState,
    st0: Vec<u8>,
    rng: &mut R,
) -> Result<Option<u64>> {
    let view = run(x, params, oracle, advice, st0, rng, false)?;
    Ok(view.istar.map(|_| view.iteration_count))
}

fn run<R: Rng + ?Sized>(
    x: &Graph,
    params: SimParams,
    oracle: &mut ChannelOracle,
    advice: QState,
    st0: Vec<u8>,
    rng: &mut R,
    full: bool,
) -> Result<SimView> {
    if params.max_iters == 0 {
        return Err(Error::Config("max_iters must be at least 1".into()));
    }
    let m = oracle.width();
    if advice.num_qubits() != m {
        return Err(Error::Dimension(format!("{}-qubit advice for width {m}", advice.num_qubits())));
    }
    let mut budget = QubitBudget::new(2 * m);
    budget.allocate(m)?;
    let mut main = Main {
        oracle,
        memory: st0,
        x: Some(advice),
        messages: vec![],
        session_id: 0,
    };
    let mut iterations = 0u64;
    let mut istar = None;

    let verdict = 'run: {
        // step 1: main thread through the first openings
        let hello = match main.call(0, None, rng)? {
            Reply::Msg(h) => h,
            Reply::Over(v) => break 'run v,
        };
        main.session_id = hello.session_id;
        let mut prover = ProverState::new(hello.session_id, x.clone(), params.lambda, params.t, ProverStrategy::Guessing, rng)?;
        let c_star = match prover_step(&mut prover, &hello, &mut main.messages, rng)? {
            Ok(m) => m,
            Err(v) => break 'run v,
        };
        let coms = match main.call(1, Some(c_star), rng)? {
            Reply::Msg(m) => m,
            Reply::Over(v) => break 'run v,
        };
        let challenge = match prover_step(&mut prover, &coms, &mut main.messages, rng)? {
            Ok(m) => m,
            Err(v) => break 'run v,
        };
        let st2 = main.memory.clone();
        let first = match main.call(2, Some(challenge.clone()), rng)? {
            Reply::Msg(m) => m,
            Reply::Over(v) => break 'run v,
        };
        let b = prover.challenge_bits().expect("challenge sent").clone();
        let main_open = match &first.payload {
            Payload::FirstOpenings { openings, .. } => {
                open_alphas(prover.alpha_rmsg(), prover.alpha_commitments(), &b, openings, false)
            }
            _ => None,
        };
        if let Some(main_open) = main_open {
            // step 2: lookahead threads on (I/2^M, st)
            let (bp, look_open) = loop {
                if iterations == params.max_iters {
                    return Err(Error::IterationBudgetExceeded {
                        max_iters: params.max_iters,
                    });
                }
                iterations += 1;
                budget.allocate(m)?;
                let r_reg = maximally_mixed(m);
                let bp = Bits::random(params.lambda, rng);
                let probe = ProtocolMsg::new(main.session_id, round::CHALLENGE, Payload::Challenge { bits: bp.clone() });
                let (exit, _discarded) = main.oracle.call(2, &st2, Some(&probe), r_reg, rng)?;
                budget.release(m);
                if bp == b {
                    continue;
                }
                if let PartyStep::Send(ProtocolMsg {
                    payload: Payload::FirstOpenings { openings, .. },
                    ..
                }) = &exit.step
                {
                    if let Some(o) = open_alphas(prover.alpha_rmsg(), prover.alpha_commitments(), &bp, openings, false) {
                        break (bp, o);
                    }
                }
            };
            // step 3–4: the smallest differing index carries the trapdoor
            let i = (0..params.lambda).find(|&i| b.get(i) != bp.get(i)).expect("challenges differ");
            istar = Some(i);
            prover.set_trapdoor(i, main_open[i].xor(&look_open[i]))?;
        }
        if !full {
            break 'run Verdict::Abort { step: 4 };
        }
        // steps 5–6 and the WI phase on the main thread
        let mut incoming = first;
        for ch in 3..super::channel::CHANNELS {
            let out = match prover_step(&mut prover, &incoming, &mut main.messages, rng)? {
                Ok(m) => m,
                Err(v) => break 'run v,
            };
            match main.call(ch, Some(out), rng)? {
                Reply::Msg(m) => incoming = m,
                Reply::Over(v) => break 'run v,
            }
        }
        return Err(Error::Protocol {
            round: round::LAST,
            reason: "verifier sent a message after the WI response".into(),
        });
    };
    let register = main.x.take().expect("register X present");
    Ok(SimView {
        transcript: Transcript {
            session_id: main.session_id,
            messages: main.messages,
            verdict,
        },
        memory: main.memory,
        register,
        iteration_count: iterations,
        peak_qubits: budget.peak_used(),
        istar,
    })
}
