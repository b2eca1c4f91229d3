//! The extracted prover P̃: it runs a simulator policy for V′ and answers
//! the policy's queries itself, forwarding X to a live verifier and
//! inventing Y, Z and T from its own subspaces and keys.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::contrived::{check_shape, check_y, keys, sample_chain, ContrivedOracle, QueryLog, VAnswer, VQuery};
use super::events::{classify_queries, EventCounters};
use super::policy::{run_policy, PolicyOutcome, PolicyParams, SimPolicy};
use crate::crypto::{enc, tag, tag_verify, SymKey, TagKey};
use crate::error::Result;
use crate::protocol::{PartyStep, ProtocolMsg, Verdict, VerifierState};
use crate::qsim::QState;
use crate::subspace::{project_a, Subspace};

/// What P̃ puts in register Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CiphertextMode {
    /// Enc(0): P̃ proper, which never sees the verifier's state.
    Zero,
    /// Enc(γ) of the live verifier's real state; the view V′ itself gives.
    RealState,
}

pub struct ExtractedProver<'a> {
    k: usize,
    n: usize,
    subspaces: Vec<Subspace>,
    sk_enc: SymKey,
    tag_key: TagKey,
    /// Next channel P̃ will answer.
    r: usize,
    last_c: Option<Vec<u8>>,
    live: &'a mut VerifierState,
    mode: CiphertextMode,
    log: QueryLog,
    halted: Option<String>,
    messages: Vec<ProtocolMsg>,
    verdict: Option<Verdict>,
}

/// P̃ for a k-round V′ over `live`, with its own S_0 … S_k and keys.
pub fn extract_prover<'a>(
    k: usize,
    n: usize,
    live: &'a mut VerifierState,
    mode: CiphertextMode,
    rng: &mut dyn RngCore,
) -> Result<ExtractedProver<'a>> {
    check_shape(k, n)?;
    let subspaces = sample_chain(k, n, rng)?;
    let (sk_enc, tag_key) = keys(live.lambda(), rng)?;
    Ok(ExtractedProver {
        k,
        n,
        subspaces,
        sk_enc,
        tag_key,
        r: 1,
        last_c: None,
        live,
        mode,
        log: QueryLog::default(),
        halted: None,
        messages: vec![],
        verdict: None,
    })
}

impl ExtractedProver<'_> {
    /// The advice P̃ hands the simulator.
    pub fn advice(&self) -> QState {
        self.subspaces[0].prepare_state()
    }

    /// Why P̃ stopped answering, if it did.
    pub fn halted(&self) -> Option<&str> {
        self.halted.as_deref()
    }

    /// The live verifier's verdict.
    pub fn verdict(&self) -> Option<&Verdict> {
        self.verdict.as_ref()
    }

    /// Messages exchanged with the live verifier.
    pub fn messages(&self) -> &[ProtocolMsg] {
        &self.messages
    }

    fn refuse(&mut self, i: usize, ss: bool, z: &[u8]) -> VAnswer {
        self.log.push(i, ss, z, None);
        VAnswer::Abort
    }
}

impl ContrivedOracle for ExtractedProver<'_> {
    fn rounds(&self) -> usize {
        self.k
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn query(&mut self, i: usize, q: VQuery, rng: &mut dyn RngCore) -> Result<VAnswer> {
        check_y(self.n, &q.y)?;
        if self.halted.is_some() || i != self.r || self.r > self.k {
            return Ok(self.refuse(i, false, &q.z));
        }
        let (outcome, _) = project_a(&self.subspaces[i - 1], &q.y, rng)?;
        if outcome == 1 {
            return Ok(self.refuse(i, false, &q.z));
        }
        if i > 1 {
            if self.last_c.as_deref() != Some(q.z.as_slice()) {
                self.halted = Some(format!("ciphertext mismatch at channel {i}"));
                return Ok(self.refuse(i, true, &q.z));
            }
            if !tag_verify(&self.tag_key, &q.z, &q.t) {
                return Ok(self.refuse(i, true, &q.z));
            }
        }
        if let Some(m) = &q.x {
            self.messages.push(m.clone());
        }
        let step = match self.live.next(q.x.as_ref(), rng) {
            Ok(s) => s,
            Err(e) => {
                self.halted = Some(format!("live verifier refused channel {i}: {e}"));
                return Ok(self.refuse(i, true, &q.z));
            }
        };
        match &step {
            PartyStep::Send(m) => self.messages.push(m.clone()),
            PartyStep::Done(v) => self.verdict = Some(v.clone()),
        }
        let gamma = self.live.to_bytes();
        let plain = match self.mode {
            CiphertextMode::Zero => vec![0u8; gamma.len()],
            CiphertextMode::RealState => gamma,
        };
        let c = enc(&self.sk_enc, &plain, rng);
        let t = tag(&self.tag_key, &c);
        self.log.push(i, true, &q.z, Some(c.clone()));
        self.last_c = Some(c.clone());
        self.r += 1;
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

#[derive(Debug, Clone)]
pub struct ExtractionOutcome {
    /// The live verifier's verdict; `None` when the run stopped early.
    pub verdict: Option<Verdict>,
    pub halted: Option<String>,
    pub events: EventCounters,
    pub policy: PolicyOutcome,
}

impl ExtractionOutcome {
    pub fn accepted(&self) -> bool {
        self.verdict.as_ref().is_some_and(Verdict::is_accept)
    }
}

/// P̃ against the live verifier, running `policy` as its simulator.
pub fn run_extracted(
    policy: SimPolicy,
    k: usize,
    n: usize,
    live: &mut VerifierState,
    mode: CiphertextMode,
    params: &PolicyParams,
    rng: &mut dyn RngCore,
) -> Result<ExtractionOutcome> {
    let mut p = extract_prover(k, n, live, mode, rng)?;
    let advice = p.advice();
    let outcome = run_policy(policy, &mut p, advice, params, rng)?;
    Ok(ExtractionOutcome {
        verdict: p.verdict.clone(),
        halted: p.halted.clone(),
        events: classify_queries(&p.log, k),
        policy: outcome,
    })
}
