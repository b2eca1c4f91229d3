//! Exact checks of the maximally-mixed rewinding bound, and the
//! termination tail of the lookahead loop.
//!
//! Effects are read off the verifier's own channels by running them on a
//! Hermitian operator basis; Sim never takes this path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::{verifier_channel_branches, Entry, Exit, Verifier};
use super::oracle::make_oracle;
use super::sim::{rewind_iterations, SimParams};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::protocol::{round, PartyStep, Payload, ProtocolMsg, ProverState, ProverStrategy};
use crate::qsim::{maximally_mixed, povm_prob, CMatrix, Effect, QState, C64};
use crate::wi::Graph;

/// Largest width handled with dense effects.
pub const MAX_EXACT_WIDTH: usize = 5;
/// Largest number of challenge bits enumerated.
pub const MAX_CHALLENGE_CLASSES_LOG2: usize = 10;

/// Effect Λ with Tr(Λ·op) = `tr(op)` for every operator, from traces on
/// a Hermitian basis.
pub fn effect_from_traces(m: usize, mut tr: impl FnMut(QState) -> Result<f64>) -> Result<CMatrix> {
    let d = 1usize << m;
    let mut lam = CMatrix::zeros(d);
    let unit = |entries: &[(usize, usize, C64)]| {
        let mut e = CMatrix::zeros(d);
        for &(r, c, v) in entries {
            e.set(r, c, v);
        }
        QState::raw_operator(e)
    };
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    for j in 0..d {
        lam.set(j, j, C64::new(tr(unit(&[(j, j, one)])?)?, 0.0));
        for k in j + 1..d {
            // Tr(Λ(|j⟩⟨k| + |k⟩⟨j|)) = 2 Re Λ_jk, Tr(Λ·i(|j⟩⟨k| − |k⟩⟨j|)) = 2 Im Λ_jk
            let re = tr(unit(&[(j, k, one), (k, j, one)])?)? / 2.0;
            let im = tr(unit(&[(j, k, i), (k, j, -i)])?)? / 2.0;
            lam.set(j, k, C64::new(re, im));
            lam.set(k, j, C64::new(re, -im));
        }
    }
    Ok(lam)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub verifier: String,
    pub width: usize,
    pub lambda: usize,
    /// Main-thread non-abort probability at step 4.
    pub p: f64,
    /// Lookahead success probability on I/2^M with b′ ≠ b.
    pub p_prime: f64,
    /// (p / 2^M)(1 − 2^{−λ}).
    pub rhs: f64,
    /// p′ / rhs, infinite when rhs = 0.
    pub ratio: f64,
    /// Prefix branches on which the inequality fails beyond 1e−9.
    pub violations: usize,
    pub branches: usize,
}

struct Prefix {
    weight: f64,
    rho: QState,
    st2: Vec<u8>,
    session_id: u64,
}

fn sent(exit: &Exit) -> Option<&ProtocolMsg> {
    match &exit.step {
        PartyStep::Send(m) if !m.payload.is_terminal() => Some(m),
        _ => None,
    }
}

/// Every classical branch of Φ_0, Φ_1 on the advice that reaches Φ_2,
/// with its unnormalised register.
fn prefixes<R: Rng + ?Sized>(v: &dyn Verifier, x: &Graph, lambda: usize, t: u32, rng: &mut R) -> Result<Vec<Prefix>> {
    let mut out = Vec::new();
    let e0 = Entry {
        memory: v.initial_memory(0),
        incoming: None,
        coins: rng.gen(),
    };
    for (x0, b0) in verifier_channel_branches(v, 0, &e0, v.advice().to_mixed())? {
        let Some(hello) = sent(&x0) else { continue };
        if b0.weight() <= 1e-15 {
            continue;
        }
        let mut prover = ProverState::new(hello.session_id, x.clone(), lambda, t, ProverStrategy::Guessing, rng)?;
        let PartyStep::Send(cstar) = prover.next(hello, rng)? else { continue };
        let e1 = Entry {
            memory: x0.memory.clone(),
            incoming: Some(cstar),
            coins: rng.gen(),
        };
        for (x1, b1) in verifier_channel_branches(v, 1, &e1, b0.quantum.clone())? {
            if sent(&x1).is_none() || b1.weight() <= 1e-15 {
                continue;
            }
            out.push(Prefix {
                weight: b1.weight(),
                rho: b1.quantum,
                st2: x1.memory,
                session_id: hello.session_id,
            });
        }
    }
    Ok(out)
}


fn scaled(m: &CMatrix, s: f64) -> CMatrix {
    m.scale(C64::new(s, 0.0))
}

/// Exact p and p′ for a verifier of width ≤ 5 whose Φ_2 abort decision
/// reads at most ten challenge bits.
pub fn bound_check<R: Rng + ?Sized>(v: &dyn Verifier, x: &Graph, lambda: usize, t: u32, rng: &mut R) -> Result<BoundReport> {
    let m = v.width();
    if m > MAX_EXACT_WIDTH {
        return Err(Error::Mode(format!("width {m} above {MAX_EXACT_WIDTH}")));
    }
    let d = v.challenge_dependence().min(lambda);
    if d > MAX_CHALLENGE_CLASSES_LOG2 {
        return Err(Error::Mode(format!("abort decision reads {d} challenge bits")));
    }
    let two_m = (1u64 << m) as f64;
    let miss = 0.5f64.powi(lambda as i32);
    let mut report = BoundReport {
        verifier: v.name(),
        width: m,
        lambda,
        p: 0.0,
        p_prime: 0.0,
        rhs: 0.0,
        ratio: f64::INFINITY,
        violations: 0,
        branches: 0,
    };
    let mut total = 0.0;
    for pre in prefixes(v, x, lambda, t, rng)? {
        let coins: u64 = rng.gen();
        // Λ_c for each class of the first d challenge bits
        let mut classes = Vec::with_capacity(1 << d);
        for c in 0..1u64 << d {
            let mut b = Bits::random(lambda, rng);
            for k in 0..d {
                b.set(k, (c >> k) & 1 == 1);
            }
            let msg = ProtocolMsg::new(pre.session_id, round::CHALLENGE, Payload::Challenge { bits: b });
            let entry = Entry {
                memory: pre.st2.clone(),
                incoming: Some(msg),
                coins,
            };
            let lam = effect_from_traces(m, |op| {
                Ok(verifier_channel_branches(v, 2, &entry, op)?
                    .iter()
                    .filter(|(e, _)| e.is_non_abort())
                    .map(|(_, b)| b.weight())
                    .sum())
            })?;
            classes.push(lam);
        }
        let w = 1.0 / classes.len() as f64;
        let mut mean = CMatrix::zeros(1 << m);
        for lam in &classes {
            mean = mean.add(&scaled(lam, w));
        }
        let rho = QState::from_density(scaled(&pre.rho.density_matrix(), 1.0 / pre.weight))?;
        let p = povm_prob(&Effect::new(mean.clone())?, &rho)?;
        // Γ_c = Λ̄ − 2^{−λ} Λ_c: fresh b′ that differs from the main b
        let mut p_prime = 0.0;
        for lam in &classes {
            let gamma = mean.sub(&scaled(lam, miss));
            p_prime += w * povm_prob(&Effect::new(gamma)?, &maximally_mixed(m))?;
        }
        let rhs = p / two_m * (1.0 - miss);
        if p_prime < rhs - 1e-9 {
            report.violations += 1;
        }
        report.branches += 1;
        report.p += pre.weight * p;
        report.p_prime += pre.weight * p_prime;
        report.rhs += pre.weight * rhs;
        total += pre.weight;
    }
    if total > 0.0 {
        report.p /= total;
        report.p_prime /= total;
        report.rhs /= total;
    }
    report.ratio = if report.rhs > 0.0 {
        report.p_prime / report.rhs
    } else {
        f64::INFINITY
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub p_prime: f64,
    /// λ / p′.
    pub threshold: f64,
    /// Runs that entered the lookahead loop.
    pub looped: usize,
    pub exceeded: usize,
    pub tail: f64,
    /// e^{−λ}.
    pub bound: f64,
    pub mean_iterations: f64,
}

/// Empirical Pr[iterations > λ/p′] over `runs` simulations of steps 1–2.
pub fn termination_tail(
    make: &dyn Fn() -> Box<dyn Verifier>,
    x: &Graph,
    lambda: usize,
    t: u32,
    runs: usize,
    seed: u64,
) -> Result<TailReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = make();
    let p_prime = bound_check(probe.as_ref(), x, lambda, t, &mut rng)?.p_prime;
    if p_prime <= 0.0 {
        return Err(Error::Stat("p′ = 0: the loop never terminates".into()));
    }
    let threshold = lambda as f64 / p_prime;
    let params = SimParams {
        lambda,
        t,
        max_iters: super::sim::DEFAULT_MAX_ITERS,
    };
    let (mut looped, mut exceeded, mut sum) = (0usize, 0usize, 0u64);
    for _ in 0..runs {
        let v = make();
        let (advice, st0, m) = (v.advice(), v.initial_memory(0), v.width());
        let mut oracle = make_oracle(v, m)?;
        if let Some(it) = rewind_iterations(x, params, &mut oracle, advice, st0, &mut rng)? {
            looped += 1;
            sum += it;
            if it as f64 > threshold {
                exceeded += 1;
            }
        }
    }
    Ok(TailReport {
        p_prime,
        threshold,
        looped,
        exceeded,
        tail: if looped > 0 { exceeded as f64 / looped as f64 } else { 0.0 },
        bound: (-(lambda as f64)).exp(),
        mean_iterations: if looped > 0 { sum as f64 / looped as f64 } else { 0.0 },
    })
}
