//! Sessions: endpoints, transports, transcripts and replay.

use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, TcpStream};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codec::{decode_msg, encode_msg, read_frame, write_frame};
use super::msg::{round, Dir, Payload, ProtocolMsg, Verdict};
use super::prover::{open_alphas, ProverState};
use super::verifier::{PartyStep, VerifierState};
use crate::crypto::commit::{Commitment, ReceiverMsg};
use crate::error::{Error, Result};
use crate::wi::{build_compound_circuit, mpc_verify, reps_for_soundness, CompoundStatement, Graph};

/// One side of a session. The verifier is called first with `None`.
pub trait Endpoint {
    fn next(&mut self, incoming: Option<&ProtocolMsg>, rng: &mut dyn RngCore) -> Result<PartyStep>;
}

impl Endpoint for VerifierState {
    fn next(&mut self, incoming: Option<&ProtocolMsg>, rng: &mut dyn RngCore) -> Result<PartyStep> {
        VerifierState::next(self, incoming, rng)
    }
}

impl Endpoint for ProverState {
    fn next(&mut self, incoming: Option<&ProtocolMsg>, rng: &mut dyn RngCore) -> Result<PartyStep> {
        let m = incoming.ok_or_else(|| Error::Protocol {
            round: 0,
            reason: "the prover never speaks first".into(),
        })?;
        ProverState::next(self, m, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transport {
    /// Messages handed over as values.
    Direct,
    /// Every message goes through the wire codec.
    InProc,
    /// Loopback TCP, one thread per party.
    Tcp,
}

impl std::str::FromStr for Transport {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Transport::Direct),
            "inproc" => Ok(Transport::InProc),
            "tcp" => Ok(Transport::Tcp),
            _ => Err(Error::Config(format!("unknown transport {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: u64,
    pub messages: Vec<ProtocolMsg>,
    pub verdict: Verdict,
}

impl Transcript {
    /// Challenge bits sent in round 3, if the session got that far.
    pub fn challenge_bits(&self) -> Option<&crate::bits::Bits> {
        self.messages.iter().find_map(|m| match &m.payload {
            Payload::Challenge { bits } => Some(bits),
            _ => None,
        })
    }

    /// Structural checks: strictly increasing rounds, directions matching
    /// the round map, payload types matching rounds, and the prover's c*
    /// as the first prover message.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |round: u32, reason: &str| Error::Protocol {
            round,
            reason: reason.into(),
        };
        let mut last: Option<u32> = None;
        for (k, m) in self.messages.iter().enumerate() {
            if m.session_id != self.session_id {
                return Err(bad(m.round, "message from another session"));
            }
            if last.is_some_and(|r| m.round <= r) {
                return Err(bad(m.round, "rounds do not increase"));
            }
            last = Some(m.round);
            if m.payload.is_terminal() {
                if k + 1 != self.messages.len() {
                    return Err(bad(m.round, "messages after a terminal message"));
                }
            } else if m.payload.expected_round() != Some(m.round) || m.dir != Dir::of_round(m.round) {
                return Err(bad(m.round, "payload does not belong to its round"));
            }
        }
        if let Some(first) = self.messages.iter().find(|m| m.dir == Dir::ProverToVerifier) {
            if !matches!(first.payload, Payload::CStar { .. }) && !first.payload.is_terminal() {
                return Err(bad(first.round, "the first prover message is not c*"));
            }
        }
        Ok(())
    }
}

/// Transport failure mid-session, with the messages exchanged so far.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionFailure {
    pub error: Error,
    pub partial: Vec<ProtocolMsg>,
}

impl From<SessionFailure> for Error {
    fn from(f: SessionFailure) -> Self {
        Error::SessionAborted(format!("{} after {} messages", f.error, f.partial.len()))
    }
}

/// Verdict implied by a terminal message.
fn terminal_verdict(p: &Payload) -> Option<Verdict> {
    match p {
        Payload::Abort { step } => Some(Verdict::Abort { step: *step }),
        Payload::Reject { step, .. } => Some(Verdict::Reject { step: *step }),
        _ => None,
    }
}

/// Drives both parties to a verdict. The parties draw from independent
/// streams derived from `rng`, so the transport does not change results.
pub fn run_session(
    prover: &mut (dyn Endpoint + Send),
    verifier: &mut (dyn Endpoint + Send),
    transport: Transport,
    session_id: u64,
    rng: &mut dyn RngCore,
) -> std::result::Result<Transcript, SessionFailure> {
    let mut prng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut vrng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    match transport {
        Transport::Direct | Transport::InProc => {
            let wire = transport == Transport::InProc;
            let mut messages = Vec::new();
            let fail = |error: Error, messages: &Vec<ProtocolMsg>| SessionFailure {
                error,
                partial: messages.clone(),
            };
            let mut incoming: Option<ProtocolMsg> = None;
            let mut verifier_turn = true;
            loop {
                let step = if verifier_turn {
                    verifier.next(incoming.as_ref(), &mut vrng)
                } else {
                    prover.next(incoming.as_ref(), &mut prng)
                }
                .map_err(|e| fail(e, &messages))?;
                match step {
                    PartyStep::Done(verdict) => {
                        return Ok(Transcript {
                            session_id,
                            messages,
                            verdict,
                        })
                    }
                    PartyStep::Send(m) => {
                        let m = if wire {
                            encode_msg(&m).and_then(|b| decode_msg(&b)).map_err(|e| fail(e, &messages))?
                        } else {
                            m
                        };
                        messages.push(m.clone());
                        if let Some(verdict) = terminal_verdict(&m.payload) {
                            return Ok(Transcript {
                                session_id,
                                messages,
                                verdict,
                            });
                        }
                        incoming = Some(m);
                        verifier_turn = !verifier_turn;
                    }
                }
            }
        }
        Transport::Tcp => {
            let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| SessionFailure {
                error: e.into(),
                partial: vec![],
            })?;
            let addr = listener.local_addr().map_err(|e| SessionFailure {
                error: e.into(),
                partial: vec![],
            })?;
            std::thread::scope(|s| {
                let vside = s.spawn(move || -> std::result::Result<Transcript, SessionFailure> {
                    let (stream, _) = listener.accept().map_err(|e| SessionFailure {
                        error: e.into(),
                        partial: vec![],
                    })?;
                    party_loop(verifier, stream, true, session_id, &mut vrng)
                });
                let pres = TcpStream::connect(addr)
                    .map_err(|e| SessionFailure {
                        error: e.into(),
                        partial: vec![],
                    })
                    .and_then(|stream| party_loop(prover, stream, false, session_id, &mut prng));
                let vres = vside.join().expect("verifier thread does not panic");
                // the verifier's record is authoritative; it sees every message
                match (vres, pres) {
                    (Ok(t), _) => Ok(t),
                    (Err(e), _) => Err(e),
                }
            })
        }
    }
}

/// Runs one party over a stream until the session ends. Both parties
/// record the full message sequence.
pub fn party_loop(
    ep: &mut (dyn Endpoint + Send),
    stream: TcpStream,
    speaks_first: bool,
    session_id: u64,
    rng: &mut dyn RngCore,
) -> std::result::Result<Transcript, SessionFailure> {
    let mut messages = Vec::new();
    let fail = |error: Error, messages: &Vec<ProtocolMsg>| SessionFailure {
        error,
        partial: messages.clone(),
    };
    let rd = stream.try_clone().map_err(|e| fail(e.into(), &messages))?;
    let mut reader = BufReader::new(rd);
    let mut writer = BufWriter::new(stream);
    let mut incoming: Option<ProtocolMsg> = None;
    if !speaks_first {
        let m = read_frame(&mut reader).map_err(|e| fail(e, &messages))?;
        messages.push(m.clone());
        if let Some(verdict) = terminal_verdict(&m.payload) {
            return Ok(Transcript {
                session_id,
                messages,
                verdict,
            });
        }
        incoming = Some(m);
    }
    loop {
        match ep.next(incoming.as_ref(), rng).map_err(|e| fail(e, &messages))? {
            PartyStep::Done(verdict) => {
                // tell the peer when the verdict was reached without a message
                let note = ProtocolMsg::new(session_id, round::LAST + 1, verdict_payload(&verdict));
                let _ = write_frame(&mut writer, &note);
                return Ok(Transcript {
                    session_id,
                    messages,
                    verdict,
                });
            }
            PartyStep::Send(m) => {
                write_frame(&mut writer, &m).map_err(|e| fail(e, &messages))?;
                messages.push(m.clone());
                if let Some(verdict) = terminal_verdict(&m.payload) {
                    return Ok(Transcript {
                        session_id,
                        messages,
                        verdict,
                    });
                }
            }
        }
        let m = read_frame(&mut reader).map_err(|e| fail(e, &messages))?;
        if m.round > round::LAST {
            // out-of-band verdict notice; not part of the transcript
            let verdict = terminal_verdict(&m.payload).unwrap_or(Verdict::Accept);
            return Ok(Transcript {
                session_id,
                messages,
                verdict,
            });
        }
        messages.push(m.clone());
        if let Some(verdict) = terminal_verdict(&m.payload) {
            return Ok(Transcript {
                session_id,
                messages,
                verdict,
            });
        }
        incoming = Some(m);
    }
}

fn verdict_payload(v: &Verdict) -> Payload {
    match v {
        Verdict::Accept => Payload::Reject {
            step: 0,
            reason: "accept".into(),
        },
        Verdict::Reject { step } => Payload::Reject {
            step: *step,
            reason: "reject".into(),
        },
        Verdict::Abort { step } => Payload::Abort { step: *step },
    }
}

/// Serves verifier sessions on a listener, one connection per session.
pub fn serve_verifier(
    listener: &TcpListener,
    sessions: usize,
    mut make: impl FnMut(u64) -> Result<VerifierState>,
    rng: &mut dyn RngCore,
) -> Result<Vec<Transcript>> {
    let mut out = Vec::with_capacity(sessions);
    for sid in 0..sessions as u64 {
        let (stream, _) = listener.accept()?;
        let mut v = make(sid)?;
        let mut vrng = ChaCha8Rng::seed_from_u64(rng.next_u64());
        out.push(party_loop(&mut v, stream, true, sid, &mut vrng)?);
    }
    Ok(out)
}

/// Connects one prover session to a remote verifier.
pub fn connect_prover(addr: &str, prover: &mut ProverState, session_id: u64, rng: &mut dyn RngCore) -> Result<Transcript> {
    let stream = TcpStream::connect(addr)?;
    let mut prng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    Ok(party_loop(prover, stream, false, session_id, &mut prng)?)
}

fn payload_at<'a>(t: &'a Transcript, r: u32) -> Option<&'a Payload> {
    t.messages.iter().find(|m| m.round == r && !m.payload.is_terminal()).map(|m| &m.payload)
}

/// Re-runs the verifier's checks on a stored transcript and returns the
/// verdict they imply. α values come from the openings in the transcript.
pub fn replay_verify(t: &Transcript, graph: &Graph, lambda: usize, wi_t: u32) -> Result<Verdict> {
    t.check_structure()?;
    if let Some(m) = t.messages.last() {
        if let Some(v) = terminal_verdict(&m.payload) {
            return Ok(v);
        }
    }
    let missing = |r: u32| Error::Protocol {
        round: r,
        reason: "transcript ends before a verdict".into(),
    };
    let rmsg_star = match payload_at(t, round::HELLO) {
        Some(Payload::Hello { rmsg }) => rmsg.clone(),
        _ => return Err(missing(round::HELLO)),
    };
    let (c_star, alpha_rmsg): (Commitment, ReceiverMsg) = match payload_at(t, round::C_STAR) {
        Some(Payload::CStar { c_star, rmsg }) => (c_star.clone(), rmsg.clone()),
        _ => return Err(missing(round::C_STAR)),
    };
    let coms = match payload_at(t, round::ALPHA_COMMIT) {
        Some(Payload::AlphaCommitments { coms }) => coms.clone(),
        _ => return Err(missing(round::ALPHA_COMMIT)),
    };
    let bits = match payload_at(t, round::CHALLENGE) {
        Some(Payload::Challenge { bits }) => bits.clone(),
        _ => return Err(missing(round::CHALLENGE)),
    };
    let (first, rmsg_2star) = match payload_at(t, round::FIRST_OPEN) {
        Some(Payload::FirstOpenings { openings, rmsg }) => (openings.clone(), rmsg.clone()),
        _ => return Err(missing(round::FIRST_OPEN)),
    };
    let c_2star = match payload_at(t, round::C_2STAR) {
        Some(Payload::C2Star { c }) => c.clone(),
        _ => return Err(missing(round::C_2STAR)),
    };
    let (second, rmsg_wi) = match payload_at(t, round::SECOND_OPEN) {
        Some(Payload::SecondOpenings { openings, rmsg }) => (openings.clone(), rmsg.clone()),
        _ => return Err(missing(round::SECOND_OPEN)),
    };
    let (commit, ch, resp) = match (
        payload_at(t, round::WI_COMMIT),
        payload_at(t, round::WI_CHALLENGE),
        payload_at(t, round::WI_RESPONSE),
    ) {
        (Some(Payload::WiCommit(c)), Some(Payload::WiChallenge(e)), Some(Payload::WiResponse(r))) => (c, e, r),
        _ => return Err(missing(round::WI_COMMIT)),
    };
    // the honest verifier's own openings are valid by construction
    let (Some(a), Some(b)) = (
        open_alphas(&alpha_rmsg, &coms, &bits, &first, false),
        open_alphas(&alpha_rmsg, &coms, &bits, &second, true),
    ) else {
        return Err(Error::Protocol {
            round: round::FIRST_OPEN,
            reason: "stored openings do not verify".into(),
        });
    };
    let alphas = (0..lambda)
        .map(|i| {
            if bits.get(i) {
                [b[i].clone(), a[i].clone()]
            } else {
                [a[i].clone(), b[i].clone()]
            }
        })
        .collect();
    let st = CompoundStatement {
        graph: graph.clone(),
        lambda,
        rmsg_star,
        c_star,
        rmsg_2star,
        c_2star,
        alphas,
    };
    if commit.views.len() != reps_for_soundness(wi_t) {
        return Ok(Verdict::Reject { step: 7 });
    }
    let circuit = build_compound_circuit(&st)?;
    let ok = mpc_verify(&circuit, &rmsg_wi, commit, ch, resp).unwrap_or(false);
    Ok(if ok { Verdict::Accept } else { Verdict::Reject { step: 7 } })
}
