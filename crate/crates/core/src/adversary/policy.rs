//! Simulator policies against V′. Only the straight-line policy makes
//! every query with the state V′ itself handed back; the others probe
//! the channels in ways a rewinding simulator would need to.

use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::contrived::{ContrivedOracle, VAnswer, VQuery};
use super::provers::decider_prover;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::protocol::{PartyStep, ProtocolMsg, ProverState, Verdict};
use crate::qsim::{QState, C64};
use crate::subspace::measure_prefix_all;
use crate::wi::Graph;

/// Fixed Y states for probing a channel out of turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Probe {
    /// |0ⁿ⟩: overlap 2^{−n/2} with every n/2-dimensional subspace state.
    Zero,
    /// |+ⁿ⟩: overlap 2^{−n/2} as well.
    Plus,
    /// A uniformly random basis state: expected overlap 2^{−n}.
    RandomBasis,
}

impl Probe {
    pub fn state<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> QState {
        match self {
            Probe::Zero => QState::zero(n),
            Probe::Plus => {
                let a = (0.5f64).powf(n as f64 / 2.0);
                QState::from_amplitudes(vec![C64::new(a, 0.0); 1 << n]).expect("unit vector")
            }
            Probe::RandomBasis => QState::basis(n, rng.gen_range(0..1usize << n)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimPolicy {
    /// Φ_1, Φ_2, …, Φ_k once each, feeding every output forward.
    StraightLine,
    /// In order up to Φ_{r−1}, then Φ_{r+1} before Φ_r with Y = probe.
    OutOfOrder { probe: Probe },
    /// In order up to Φ_{r−1}, then measure Y and resend the outcome to Φ_r
    /// twice: the cloning-style attempt at two successful queries.
    RepeatQuery,
    /// In order up to Φ_{r−1}, then Φ_{r+1} with the held |S_{r−1}⟩.
    SkipQuery,
    /// Φ_1 in order, then Φ_2 with a modified ciphertext and a replayed or
    /// random tag.
    ForgeTag,
}

impl FromStr for SimPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "straight-line" => SimPolicy::StraightLine,
            "out-of-order" => SimPolicy::OutOfOrder { probe: Probe::Zero },
            "out-of-order-plus" => SimPolicy::OutOfOrder { probe: Probe::Plus },
            "out-of-order-basis" => SimPolicy::OutOfOrder {
                probe: Probe::RandomBasis,
            },
            "repeat-query" => SimPolicy::RepeatQuery,
            "skip-query" => SimPolicy::SkipQuery,
            "forge-tag" => SimPolicy::ForgeTag,
            _ => return Err(Error::Config(format!("unknown policy {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub x: Graph,
    pub lambda: usize,
    pub t: u32,
    pub session_id: u64,
}

#[derive(Debug, Clone)]
pub struct PolicyOutcome {
    /// Final verdict when the policy drove Φ_k to completion.
    pub verdict: Option<Verdict>,
    /// Channel whose query was refused, ending the run.
    pub aborted_at: Option<usize>,
    /// Y after the last answered query.
    pub final_y: Option<QState>,
    /// Log positions of the probe queries, in the order made.
    pub probes: Vec<usize>,
}

/// Registers the simulator holds between queries.
struct Driver {
    prover: ProverState,
    x: Option<ProtocolMsg>,
    y: Option<QState>,
    z: Vec<u8>,
    t: Bits,
}

enum Next {
    Continue,
    Aborted,
    Finished(Verdict),
}

impl Driver {
    fn query(&self, y: QState) -> VQuery {
        VQuery {
            x: self.x.clone(),
            y,
            z: self.z.clone(),
            t: self.t.clone(),
        }
    }

    /// Feeds an answer forward and prepares the prover's next message.
    fn absorb(&mut self, ans: VAnswer, rng: &mut dyn RngCore) -> Result<Next> {
        let VAnswer::Reply { x, y, z, t } = ans else {
            return Ok(Next::Aborted);
        };
        self.y = Some(y);
        self.z = z;
        self.t = t;
        match x {
            PartyStep::Done(v) => Ok(Next::Finished(v)),
            PartyStep::Send(m) => match self.prover.next(&m, rng)? {
                PartyStep::Done(v) => Ok(Next::Finished(v)),
                PartyStep::Send(p) => match &p.payload {
                    crate::protocol::Payload::Reject { step, .. } => Ok(Next::Finished(Verdict::Reject { step: *step })),
                    _ => {
                        self.x = Some(p);
                        Ok(Next::Continue)
                    }
                },
            },
        }
    }

    fn step(&mut self, oracle: &mut dyn ContrivedOracle, i: usize, rng: &mut dyn RngCore) -> Result<Next> {
        let y = self.y.take().expect("Y held between queries");
        let ans = oracle.query(i, self.query(y), rng)?;
        self.absorb(ans, rng)
    }
}

/// Drives `oracle` with `policy`, starting from V′'s advice.
pub fn run_policy(
    policy: SimPolicy,
    oracle: &mut dyn ContrivedOracle,
    advice: QState,
    params: &PolicyParams,
    rng: &mut dyn RngCore,
) -> Result<PolicyOutcome> {
    let k = oracle.rounds();
    let n = oracle.ambient_dim();
    let mut d = Driver {
        prover: decider_prover(params.session_id, &params.x, params.lambda, params.t, rng)?,
        x: None,
        y: Some(advice),
        z: vec![],
        t: Bits::new(),
    };
    let mut out = PolicyOutcome {
        verdict: None,
        aborted_at: None,
        final_y: None,
        probes: vec![],
    };
    // channel at which the policy leaves the in-order path
    let r = match policy {
        SimPolicy::StraightLine => k + 1,
        SimPolicy::RepeatQuery => rng.gen_range(1..=k),
        SimPolicy::ForgeTag => 2,
        _ => rng.gen_range(1..k.max(2)),
    };
    if policy != SimPolicy::StraightLine && (k < 2 || r > k) {
        return Err(Error::Config(format!("{policy:?} needs at least two rounds")));
    }
    for i in 1..r.min(k + 1) {
        match d.step(oracle, i, rng)? {
            Next::Continue => {}
            Next::Aborted => {
                out.aborted_at = Some(i);
                out.final_y = d.y;
                return Ok(out);
            }
            Next::Finished(v) => {
                out.verdict = Some(v);
                out.final_y = d.y;
                return Ok(out);
            }
        }
    }
    // a probe ends the run; its answer is only counted
    let mut probe = |i: usize, q: VQuery, rng: &mut dyn RngCore| -> Result<()> {
        if oracle.query(i, q, rng)?.is_abort() {
            out.aborted_at.get_or_insert(i);
        }
        out.probes.push(oracle.log().len() - 1);
        Ok(())
    };
    match policy {
        SimPolicy::StraightLine => {}
        SimPolicy::OutOfOrder { probe: p } => {
            let q = d.query(p.state(n, rng));
            probe(r + 1, q, rng)?;
        }
        SimPolicy::SkipQuery => {
            let y = d.y.take().expect("Y held");
            let q = d.query(y);
            probe(r + 1, q, rng)?;
        }
        SimPolicy::RepeatQuery => {
            let v = measure_prefix_all(d.y.take().expect("Y held"), rng)? as usize;
            let q = d.query(QState::basis(n, v));
            probe(r, q.clone(), rng)?;
            probe(r, q, rng)?;
        }
        SimPolicy::ForgeTag => {
            let y = d.y.take().expect("Y held");
            probe(2, forged(d.query(y), rng), rng)?;
        }
    }
    Ok(out)
}

/// Flips one ciphertext bit and keeps the old tag or draws a fresh one.
/// X stays the prover's real message, so only the tag stands in the way.
fn forged(mut q: VQuery, rng: &mut dyn RngCore) -> VQuery {
    if q.z.is_empty() {
        q.z.push(0);
    }
    let pos = rng.gen_range(0..q.z.len() * 8);
    q.z[pos / 8] ^= 1 << (pos % 8);
    if rng.gen() {
        q.t = Bits::random(q.t.len(), rng);
    }
    q
}

/// The tag-forging game: Φ_1 in order, then `attempts` forged queries to
/// Φ_2. Each attempt gets its own copy of the held Y, which only helps the
/// forger. Returns the number of forged queries V′ answered.
pub fn run_forgeries(
    oracle: &mut dyn ContrivedOracle,
    advice: QState,
    params: &PolicyParams,
    attempts: usize,
    rng: &mut dyn RngCore,
) -> Result<usize> {
    if oracle.rounds() < 2 {
        return Err(Error::Config("forging needs at least two rounds".into()));
    }
    let mut d = Driver {
        prover: decider_prover(params.session_id, &params.x, params.lambda, params.t, rng)?,
        x: None,
        y: Some(advice),
        z: vec![],
        t: Bits::new(),
    };
    if !matches!(d.step(oracle, 1, rng)?, Next::Continue) {
        return Err(Error::Protocol {
            round: 0,
            reason: "the in-order Φ_1 query did not continue".into(),
        });
    }
    let y = d.y.take().expect("Y held");
    let mut answered = 0;
    for _ in 0..attempts {
        if !oracle.query(2, forged(d.query(y.clone()), rng), rng)?.is_abort() {
            answered += 1;
        }
    }
    Ok(answered)
}
