//! Prover state machine with pluggable strategies.
//!
//! r* and its commitment seeds are drawn in [`ProverState::new`], before
//! any verifier message exists.

use rand::Rng;

use super::msg::{round, step_of_round, Payload, ProtocolMsg, Verdict};
use super::verifier::PartyStep;
use crate::bits::Bits;
use crate::crypto::commit::{check_lambda, commit_bits, commit_shared, verify_open, Commitment, Opening, ReceiverMsg};
use crate::error::{Error, Result};
use crate::wi::compound::encode_trapdoor_message;
use crate::wi::{
    build_compound_circuit, index_bits, mpc_commit, mpc_commit_cheating, reps_for_soundness, CompoundStatement,
    CompoundWitness, Graph, InputLayout, MpcProverState,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProverStrategy {
    /// Knows a Hamiltonian cycle of x.
    Honest { cycle: Vec<usize> },
    /// Commits a uniformly random (i, g) as c** and proves through the
    /// trapdoor branch, which holds iff g = α_{i,0} ⊕ α_{i,1}.
    Guessing,
    /// Copies the verifier's unopened α commitment blocks into c**.
    Mauling,
}

/// Checks the openings of α_{i, b_i ⊕ flip} against the commitments and
/// returns the opened strings.
pub fn open_alphas(
    rmsg: &ReceiverMsg,
    coms: &[[Commitment; 2]],
    bits: &Bits,
    openings: &[Opening],
    flip: bool,
) -> Option<Vec<Bits>> {
    let l = rmsg.lambda();
    if coms.len() != l || bits.len() != l || openings.len() != l {
        return None;
    }
    (0..l)
        .map(|i| {
            let side = (bits.get(i) ^ flip) as usize;
            let o = &openings[i];
            (o.message.len() == l && verify_open(rmsg, &coms[i][side], o).unwrap_or(false)).then(|| o.message.clone())
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ProverState {
    session_id: u64,
    graph: Graph,
    lambda: usize,
    t: u32,
    strategy: ProverStrategy,
    rstar: Bits,
    rseeds: Bits,
    next_round: u32,
    rmsg_star: Option<ReceiverMsg>,
    c_star: Option<Commitment>,
    alpha_rmsg: ReceiverMsg,
    coms: Vec<[Commitment; 2]>,
    bits: Option<Bits>,
    challenge_override: Option<Bits>,
    trapdoor: Option<(usize, Bits)>,
    first: Vec<Bits>,
    rmsg_2star: Option<ReceiverMsg>,
    c_2star: Option<Commitment>,
    wi_index: usize,
    wi: Option<MpcProverState>,
    verdict: Option<Verdict>,
}

impl ProverState {
    pub fn new<R: Rng + ?Sized>(
        session_id: u64,
        graph: Graph,
        lambda: usize,
        t: u32,
        strategy: ProverStrategy,
        rng: &mut R,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        if t == 0 {
            return Err(Error::Config("WI soundness exponent t must be at least 1".into()));
        }
        if let ProverStrategy::Honest { cycle } = &strategy {
            if !graph.is_hamiltonian_cycle(cycle) {
                return Err(Error::Config("honest prover needs a Hamiltonian cycle of x".into()));
            }
        }
        let rstar = Bits::random(lambda, rng);
        let rseeds = Bits::random(lambda * lambda, rng);
        let alpha_rmsg = ReceiverMsg::sample(lambda, rng)?;
        Ok(ProverState {
            session_id,
            graph,
            lambda,
            t,
            strategy,
            rstar,
            rseeds,
            next_round: round::HELLO,
            rmsg_star: None,
            c_star: None,
            alpha_rmsg,
            coms: vec![],
            bits: None,
            challenge_override: None,
            trapdoor: None,
            first: vec![],
            rmsg_2star: None,
            c_2star: None,
            wi_index: 0,
            wi: None,
            verdict: None,
        })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn rstar(&self) -> &Bits {
        &self.rstar
    }

    pub fn challenge_bits(&self) -> Option<&Bits> {
        self.bits.as_ref()
    }

    /// Receiver message under which the verifier commits to α.
    pub fn alpha_rmsg(&self) -> &ReceiverMsg {
        &self.alpha_rmsg
    }

    pub fn alpha_commitments(&self) -> &[[Commitment; 2]] {
        &self.coms
    }

    /// Fixes the challenge bits instead of sampling them.
    pub fn set_challenge(&mut self, bits: Bits) -> Result<()> {
        if bits.len() != self.lambda || self.bits.is_some() {
            return Err(Error::Config("challenge override has the wrong width or comes too late".into()));
        }
        self.challenge_override = Some(bits);
        Ok(())
    }

    /// Commits (i*, β) as c** and proves the WI phase through the trapdoor
    /// branch, whatever the strategy.
    pub fn set_trapdoor(&mut self, istar: usize, beta: Bits) -> Result<()> {
        if istar >= self.lambda || beta.len() != self.lambda || self.c_2star.is_some() {
            return Err(Error::Config("trapdoor has the wrong shape or comes too late".into()));
        }
        self.trapdoor = Some((istar, beta));
        Ok(())
    }

    fn send(&mut self, r: u32, payload: Payload) -> PartyStep {
        self.next_round = r + 1;
        PartyStep::Send(ProtocolMsg::new(self.session_id, r, payload))
    }

    fn reject(&mut self, r: u32, reason: &str) -> PartyStep {
        let step = step_of_round(r);
        self.verdict = Some(Verdict::Reject { step });
        PartyStep::Send(ProtocolMsg::new(
            self.session_id,
            r + 1,
            Payload::Reject {
                step,
                reason: reason.into(),
            },
        ))
    }

    fn c2_message<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Commitment> {
        let l = self.lambda;
        let rmsg = self.rmsg_2star.as_ref().expect("c** receiver message received");
        if let Some((i, beta)) = &self.trapdoor {
            self.wi_index = *i;
            return commit_shared(rmsg, &encode_trapdoor_message(l, *i, beta), &self.rstar);
        }
        match &self.strategy {
            ProverStrategy::Honest { .. } => commit_shared(rmsg, &Bits::zeros(index_bits(l) + l), &self.rstar),
            ProverStrategy::Guessing => {
                let i = rng.gen_range(0..l);
                self.wi_index = i;
                let g = Bits::random(l, rng);
                commit_shared(rmsg, &encode_trapdoor_message(l, i, &g), &self.rstar)
            }
            ProverStrategy::Mauling => {
                let bits = self.bits.as_ref().expect("challenge sent");
                let unopened = |i: usize| &self.coms[i][1 - bits.get(i) as usize];
                let mut out = Bits::new();
                for j in 0..index_bits(l) {
                    out.extend_from(&unopened(0).block(j % l));
                }
                let i = rng.gen_range(0..l);
                self.wi_index = i;
                out.extend_from(unopened(i).bits());
                Commitment::from_bits(l, out)
            }
        }
    }

    fn witness(&self) -> CompoundWitness {
        match (&self.strategy, &self.trapdoor) {
            (ProverStrategy::Honest { cycle }, None) => CompoundWitness::Cycle(cycle.clone()),
            _ => CompoundWitness::Trapdoor {
                rstar: self.rstar.clone(),
                rseeds: self.rseeds.clone(),
                istar: self.wi_index,
            },
        }
    }

    /// Consumes a verifier message and produces the next prover message.
    pub fn next<R: Rng + ?Sized>(&mut self, incoming: &ProtocolMsg, rng: &mut R) -> Result<PartyStep> {
        if let Some(v) = &self.verdict {
            return Ok(PartyStep::Done(v.clone()));
        }
        let m = incoming;
        if m.session_id != self.session_id {
            return Err(Error::Protocol {
                round: m.round,
                reason: format!("session {} in session {}", m.session_id, self.session_id),
            });
        }
        match &m.payload {
            Payload::Abort { step } => {
                self.verdict = Some(Verdict::Abort { step: *step });
                return Ok(PartyStep::Done(Verdict::Abort { step: *step }));
            }
            Payload::Reject { step, .. } => {
                self.verdict = Some(Verdict::Reject { step: *step });
                return Ok(PartyStep::Done(Verdict::Reject { step: *step }));
            }
            _ => {}
        }
        if m.round != self.next_round {
            return Err(Error::Protocol {
                round: m.round,
                reason: format!("prover expected round {}", self.next_round),
            });
        }
        let l = self.lambda;
        match &m.payload {
            Payload::Hello { rmsg } if m.round == round::HELLO => {
                if rmsg.lambda() != l {
                    return Ok(self.reject(m.round, "receiver message at the wrong λ"));
                }
                let c_star = commit_bits(rmsg, &self.rstar, &self.rseeds)?;
                self.rmsg_star = Some(rmsg.clone());
                self.c_star = Some(c_star.clone());
                let rmsg = self.alpha_rmsg.clone();
                Ok(self.send(round::C_STAR, Payload::CStar { c_star, rmsg }))
            }
            Payload::AlphaCommitments { coms } if m.round == round::ALPHA_COMMIT => {
                if coms.len() != l || coms.iter().flatten().any(|c| c.lambda() != l || c.message_len() != l) {
                    return Ok(self.reject(m.round, "α commitments have the wrong shape"));
                }
                self.coms = coms.clone();
                let bits = self.challenge_override.take().unwrap_or_else(|| Bits::random(l, rng));
                self.bits = Some(bits.clone());
                Ok(self.send(round::CHALLENGE, Payload::Challenge { bits }))
            }
            Payload::FirstOpenings { openings, rmsg } if m.round == round::FIRST_OPEN => {
                let bits = self.bits.clone().expect("challenge sent");
                let Some(first) = open_alphas(&self.alpha_rmsg, &self.coms, &bits, openings, false) else {
                    return Ok(self.reject(m.round, "invalid opening of α_{i,b_i}"));
                };
                if rmsg.lambda() != l {
                    return Ok(self.reject(m.round, "c** receiver message at the wrong λ"));
                }
                self.first = first;
                self.rmsg_2star = Some(rmsg.clone());
                let c = self.c2_message(rng)?;
                self.c_2star = Some(c.clone());
                Ok(self.send(round::C_2STAR, Payload::C2Star { c }))
            }
            Payload::SecondOpenings { openings, rmsg } if m.round == round::SECOND_OPEN => {
                let bits = self.bits.clone().expect("challenge sent");
                let Some(second) = open_alphas(&self.alpha_rmsg, &self.coms, &bits, openings, true) else {
                    return Ok(self.reject(m.round, "invalid opening of α_{i,1-b_i}"));
                };
                if rmsg.lambda() != l {
                    return Ok(self.reject(m.round, "WI receiver message at the wrong λ"));
                }
                let alphas = (0..l)
                    .map(|i| {
                        if bits.get(i) {
                            [second[i].clone(), self.first[i].clone()]
                        } else {
                            [self.first[i].clone(), second[i].clone()]
                        }
                    })
                    .collect();
                let st = CompoundStatement {
                    graph: self.graph.clone(),
                    lambda: l,
                    rmsg_star: self.rmsg_star.clone().expect("hello received"),
                    c_star: self.c_star.clone().expect("c* sent"),
                    rmsg_2star: self.rmsg_2star.clone().expect("first openings received"),
                    c_2star: self.c_2star.clone().expect("c** sent"),
                    alphas,
                };
                let circuit = build_compound_circuit(&st)?;
                let layout = InputLayout {
                    vertices: self.graph.num_vertices(),
                    lambda: l,
                };
                let w = layout.encode(&self.witness())?;
                let reps = reps_for_soundness(self.t);
                let (commit, state) = if circuit.eval(&w)? {
                    mpc_commit(&circuit, &w, rmsg, reps, rng)?
                } else {
                    mpc_commit_cheating(&circuit, &w, rmsg, reps, rng)?
                };
                self.wi = Some(state);
                Ok(self.send(round::WI_COMMIT, Payload::WiCommit(commit)))
            }
            Payload::WiChallenge(ch) if m.round == round::WI_CHALLENGE => {
                let resp = match self.wi.as_ref().expect("WI commitment sent").respond(ch) {
                    Ok(r) => r,
                    Err(_) => return Ok(self.reject(m.round, "malformed WI challenge")),
                };
                Ok(self.send(round::WI_RESPONSE, Payload::WiResponse(resp)))
            }
            other => Err(Error::Protocol {
                round: m.round,
                reason: format!("{} payload where round {} was expected", other.type_name(), self.next_round),
            }),
        }
    }
}
