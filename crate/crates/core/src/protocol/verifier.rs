//! Honest verifier state machine. The whole state serialises with bincode,
//! which is what channel wrappers thread between rounds.

use bincode::Options;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::msg::{round, step_of_round, Payload, ProtocolMsg, Verdict};
use crate::bits::Bits;
use crate::crypto::commit::{check_lambda, commit_random, Commitment, Opening, ReceiverMsg};
use crate::error::{Error, Result};
use crate::wi::{
    build_compound_circuit, index_bits, mpc_verify, reps_for_soundness, CompoundStatement, Graph, MpcChallenge,
    MpcCommit,
};

/// What a party does after consuming a message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PartyStep {
    Send(ProtocolMsg),
    Done(Verdict),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierState {
    session_id: u64,
    graph: Graph,
    lambda: usize,
    t: u32,
    next_round: u32,
    rmsg_star: Option<ReceiverMsg>,
    c_star: Option<Commitment>,
    prover_rmsg: Option<ReceiverMsg>,
    alphas: Vec<[Bits; 2]>,
    openings: Vec<[Opening; 2]>,
    bits: Option<Bits>,
    rmsg_2star: Option<ReceiverMsg>,
    c_2star: Option<Commitment>,
    rmsg_wi: Option<ReceiverMsg>,
    wi_commit: Option<MpcCommit>,
    wi_challenge: Option<MpcChallenge>,
    verdict: Option<Verdict>,
}

fn state_options() -> impl Options {
    bincode::DefaultOptions::new().with_limit(1 << 28)
}

impl VerifierState {
    pub fn new(session_id: u64, graph: Graph, lambda: usize, t: u32) -> Result<Self> {
        check_lambda(lambda)?;
        if t == 0 {
            return Err(Error::Config("WI soundness exponent t must be at least 1".into()));
        }
        Ok(VerifierState {
            session_id,
            graph,
            lambda,
            t,
            next_round: round::HELLO,
            rmsg_star: None,
            c_star: None,
            prover_rmsg: None,
            alphas: vec![],
            openings: vec![],
            bits: None,
            rmsg_2star: None,
            c_2star: None,
            rmsg_wi: None,
            wi_commit: None,
            wi_challenge: None,
            verdict: None,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        state_options().serialize(self).expect("verifier state serialises")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        state_options()
            .deserialize(bytes)
            .map_err(|e| Error::Format(format!("verifier state: {e}")))
    }

    pub fn session_id(&self) -> u64 {
        self.session_id
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Round of the next message this verifier expects or emits.
    pub fn next_round(&self) -> u32 {
        self.next_round
    }

    /// Challenge bits b_1 … b_λ once received.
    pub fn challenge_bits(&self) -> Option<&Bits> {
        self.bits.as_ref()
    }

    pub fn alphas(&self) -> &[[Bits; 2]] {
        &self.alphas
    }

    pub fn verdict(&self) -> Option<&Verdict> {
        self.verdict.as_ref()
    }

    fn send(&mut self, round: u32, payload: Payload) -> PartyStep {
        self.next_round = round + 1;
        PartyStep::Send(ProtocolMsg::new(self.session_id, round, payload))
    }

    fn finish(&mut self, v: Verdict) -> PartyStep {
        self.verdict = Some(v.clone());
        PartyStep::Done(v)
    }

    /// Rejects the message of round `r` and tells the prover.
    fn reject(&mut self, r: u32, reason: String) -> PartyStep {
        let step = step_of_round(r);
        self.verdict = Some(Verdict::Reject { step });
        PartyStep::Send(ProtocolMsg::new(self.session_id, r + 1, Payload::Reject { step, reason }))
    }

    /// Consumes the prover's message (none for the opening round) and
    /// produces the next verifier message or the verdict.
    pub fn next<R: Rng + ?Sized>(&mut self, incoming: Option<&ProtocolMsg>, rng: &mut R) -> Result<PartyStep> {
        if let Some(v) = &self.verdict {
            return Ok(PartyStep::Done(v.clone()));
        }
        let Some(m) = incoming else {
            if self.next_round != round::HELLO {
                return Err(Error::Protocol {
                    round: self.next_round,
                    reason: "verifier expected a prover message".into(),
                });
            }
            let rmsg = ReceiverMsg::sample(self.lambda, rng)?;
            self.rmsg_star = Some(rmsg.clone());
            return Ok(self.send(round::HELLO, Payload::Hello { rmsg }));
        };
        if m.session_id != self.session_id {
            return Err(Error::Protocol {
                round: m.round,
                reason: format!("session {} in session {}", m.session_id, self.session_id),
            });
        }
        match &m.payload {
            Payload::Reject { step, .. } => return Ok(self.finish(Verdict::Reject { step: *step })),
            Payload::Abort { step } => return Ok(self.finish(Verdict::Abort { step: *step })),
            _ => {}
        }
        if m.round != self.next_round {
            return Err(Error::Protocol {
                round: m.round,
                reason: format!("verifier expected round {}", self.next_round),
            });
        }
        let l = self.lambda;
        match &m.payload {
            Payload::CStar { c_star, rmsg } if m.round == round::C_STAR => {
                if c_star.lambda() != l || c_star.message_len() != l || rmsg.lambda() != l {
                    return Ok(self.reject(m.round, "c* or receiver message has the wrong shape".into()));
                }
                self.c_star = Some(c_star.clone());
                self.prover_rmsg = Some(rmsg.clone());
                let mut coms = Vec::with_capacity(l);
                for _ in 0..l {
                    let a0 = Bits::random(l, rng);
                    let a1 = Bits::random(l, rng);
                    let (c0, o0) = commit_random(rmsg, &a0, rng)?;
                    let (c1, o1) = commit_random(rmsg, &a1, rng)?;
                    coms.push([c0, c1]);
                    self.alphas.push([a0, a1]);
                    self.openings.push([o0, o1]);
                }
                Ok(self.send(round::ALPHA_COMMIT, Payload::AlphaCommitments { coms }))
            }
            Payload::Challenge { bits } if m.round == round::CHALLENGE => {
                if bits.len() != l {
                    return Ok(self.reject(m.round, format!("{} challenge bits for λ={l}", bits.len())));
                }
                self.bits = Some(bits.clone());
                let openings = (0..l).map(|i| self.openings[i][bits.get(i) as usize].clone()).collect();
                let rmsg = ReceiverMsg::sample(l, rng)?;
                self.rmsg_2star = Some(rmsg.clone());
                Ok(self.send(round::FIRST_OPEN, Payload::FirstOpenings { openings, rmsg }))
            }
            Payload::C2Star { c } if m.round == round::C_2STAR => {
                if c.lambda() != l || c.message_len() != index_bits(l) + l {
                    return Ok(self.reject(m.round, "c** has the wrong width".into()));
                }
                self.c_2star = Some(c.clone());
                let bits = self.bits.clone().expect("challenge precedes c**");
                let openings = (0..l).map(|i| self.openings[i][1 - bits.get(i) as usize].clone()).collect();
                let rmsg = ReceiverMsg::sample(l, rng)?;
                self.rmsg_wi = Some(rmsg.clone());
                Ok(self.send(round::SECOND_OPEN, Payload::SecondOpenings { openings, rmsg }))
            }
            Payload::WiCommit(commit) if m.round == round::WI_COMMIT => {
                let reps = reps_for_soundness(self.t);
                if commit.views.len() != reps || commit.outputs.len() != reps {
                    return Ok(self.reject(m.round, format!("WI commitment for {} repetitions", commit.views.len())));
                }
                self.wi_commit = Some(commit.clone());
                let ch = MpcChallenge::sample(reps, rng);
                self.wi_challenge = Some(ch.clone());
                Ok(self.send(round::WI_CHALLENGE, Payload::WiChallenge(ch)))
            }
            Payload::WiResponse(resp) if m.round == round::WI_RESPONSE => {
                let circuit = build_compound_circuit(&self.statement()?)?;
                let ok = mpc_verify(
                    &circuit,
                    self.rmsg_wi.as_ref().expect("WI receiver message sent"),
                    self.wi_commit.as_ref().expect("WI commitment received"),
                    self.wi_challenge.as_ref().expect("WI challenge sent"),
                    resp,
                )
                .unwrap_or(false);
                Ok(self.finish(if ok {
                    Verdict::Accept
                } else {
                    Verdict::Reject { step: 7 }
                }))
            }
            other => Err(Error::Protocol {
                round: m.round,
                reason: format!("{} payload where round {} was expected", other.type_name(), self.next_round),
            }),
        }
    }

    /// The WI-phase statement; available once c** has arrived.
    pub fn statement(&self) -> Result<CompoundStatement> {
        let missing = || Error::Protocol {
            round: self.next_round,
            reason: "statement requested before c** arrived".into(),
        };
        Ok(CompoundStatement {
            graph: self.graph.clone(),
            lambda: self.lambda,
            rmsg_star: self.rmsg_star.clone().ok_or_else(missing)?,
            c_star: self.c_star.clone().ok_or_else(missing)?,
            rmsg_2star: self.rmsg_2star.clone().ok_or_else(missing)?,
            c_2star: self.c_2star.clone().ok_or_else(missing)?,
            alphas: self.alphas.clone(),
        })
    }
}
