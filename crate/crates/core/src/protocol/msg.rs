use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::crypto::commit::{Commitment, Opening, ReceiverMsg};
use crate::wi::{MpcChallenge, MpcCommit, MpcResponse};

/// Round map. Rounds 0–6 are the trapdoor phase, 7–9 the WI phase.
pub mod round {
    /// V→P: receiver message for c*.
    pub const HELLO: u32 = 0;
    /// P→V: c* and the prover's receiver message for the α commitments.
    pub const C_STAR: u32 = 1;
    /// V→P: commitments to α_{i,b}.
    pub const ALPHA_COMMIT: u32 = 2;
    /// P→V: b_1 … b_λ.
    pub const CHALLENGE: u32 = 3;
    /// V→P: openings of α_{i,b_i} and the receiver message for c**.
    pub const FIRST_OPEN: u32 = 4;
    /// P→V: c**.
    pub const C_2STAR: u32 = 5;
    /// V→P: openings of α_{i,1−b_i} and the receiver message for the WI views.
    pub const SECOND_OPEN: u32 = 6;
    pub const WI_COMMIT: u32 = 7;
    pub const WI_CHALLENGE: u32 = 8;
    pub const WI_RESPONSE: u32 = 9;
    pub const LAST: u32 = WI_RESPONSE;
}

/// Protocol step a round belongs to; the WI phase is step 7.
pub fn step_of_round(r: u32) -> u8 {
    r.clamp(1, 7) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    #[serde(rename = "P->V")]
    ProverToVerifier,
    #[serde(rename = "V->P")]
    VerifierToProver,
}

impl Dir {
    pub fn of_round(r: u32) -> Dir {
        if r % 2 == 1 {
            Dir::ProverToVerifier
        } else {
            Dir::VerifierToProver
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Hello {
        rmsg: ReceiverMsg,
    },
    CStar {
        c_star: Commitment,
        rmsg: ReceiverMsg,
    },
    AlphaCommitments {
        coms: Vec<[Commitment; 2]>,
    },
    Challenge {
        bits: Bits,
    },
    FirstOpenings {
        openings: Vec<Opening>,
        rmsg: ReceiverMsg,
    },
    C2Star {
        c: Commitment,
    },
    SecondOpenings {
        openings: Vec<Opening>,
        rmsg: ReceiverMsg,
    },
    WiCommit(MpcCommit),
    WiChallenge(MpcChallenge),
    WiResponse(MpcResponse),
    /// The verifier stops; terminal.
    Abort {
        step: u8,
    },
    /// The sender rejects the last message it received; terminal.
    Reject {
        step: u8,
        reason: String,
    },
}

impl Payload {
    pub fn type_name(&self) -> &'static str {
        match self {
            Payload::Hello { .. } => "hello",
            Payload::CStar { .. } => "c_star",
            Payload::AlphaCommitments { .. } => "alpha_commitments",
            Payload::Challenge { .. } => "challenge",
            Payload::FirstOpenings { .. } => "first_openings",
            Payload::C2Star { .. } => "c_2star",
            Payload::SecondOpenings { .. } => "second_openings",
            Payload::WiCommit(_) => "wi_commit",
            Payload::WiChallenge(_) => "wi_challenge",
            Payload::WiResponse(_) => "wi_response",
            Payload::Abort { .. } => "abort",
            Payload::Reject { .. } => "reject",
        }
    }

    /// Round that carries this payload; terminal payloads fit any round.
    pub fn expected_round(&self) -> Option<u32> {
        Some(match self {
            Payload::Hello { .. } => round::HELLO,
            Payload::CStar { .. } => round::C_STAR,
            Payload::AlphaCommitments { .. } => round::ALPHA_COMMIT,
            Payload::Challenge { .. } => round::CHALLENGE,
            Payload::FirstOpenings { .. } => round::FIRST_OPEN,
            Payload::C2Star { .. } => round::C_2STAR,
            Payload::SecondOpenings { .. } => round::SECOND_OPEN,
            Payload::WiCommit(_) => round::WI_COMMIT,
            Payload::WiChallenge(_) => round::WI_CHALLENGE,
            Payload::WiResponse(_) => round::WI_RESPONSE,
            Payload::Abort { .. } | Payload::Reject { .. } => return None,
        })
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Payload::Abort { .. } | Payload::Reject { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolMsg {
    pub session_id: u64,
    pub round: u32,
    pub dir: Dir,
    pub payload: Payload,
}

impl ProtocolMsg {
    pub fn new(session_id: u64, round: u32, payload: Payload) -> Self {
        ProtocolMsg {
            session_id,
            round,
            dir: Dir::of_round(round),
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject { step: u8 },
    Abort { step: u8 },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn abort_step(&self) -> Option<u8> {
        match self {
            Verdict::Abort { step } => Some(*step),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => write!(f, "accept"),
            Verdict::Reject { step } => write!(f, "reject@{step}"),
            Verdict::Abort { step } => write!(f, "abort@{step}"),
        }
    }
}
