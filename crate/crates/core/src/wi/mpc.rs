//! Three-party MPC-in-the-head proof of circuit satisfiability.
//!
//! Each repetition secret-shares the witness among three simulated
//! parties, evaluates the circuit (XOR locally, AND with one round of
//! pairwise-randomised interaction), and commits to every party's view.
//! The verifier challenges e ∈ {0,1,2}, receives views e and e+1, and
//! recomputes party e. A cheating prover survives a repetition with
//! probability at most 2/3.
//!
//! Repetitions are bitsliced 64 to a word: bit r of a wire word is the
//! share held in repetition r of the current batch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::{BoolCircuit, GateOp};
use crate::bits::Bits;
use crate::crypto::commit::{commit_long, open_long, LongCommitment, LongOpening, ReceiverMsg};
use crate::crypto::prg::Arx;
use crate::error::{Error, Result};

pub const PARTIES: usize = 3;
const SEED_BITS: usize = 64;

/// Repetitions needed for soundness error 2^{−t}: reps·log₂(3/2) ≥ t.
pub fn reps_for_soundness(t: u32) -> usize {
    (t as f64 / 1.5f64.log2()).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpcCommit {
    pub views: Vec<[LongCommitment; PARTIES]>,
    pub outputs: Vec<[bool; PARTIES]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpcChallenge {
    pub trits: Vec<u8>,
}

impl MpcChallenge {
    pub fn sample<R: Rng + ?Sized>(reps: usize, rng: &mut R) -> Self {
        MpcChallenge {
            trits: (0..reps).map(|_| rng.gen_range(0..PARTIES as u8)).collect(),
        }
    }
}

/// Openings of views e and e+1 for each repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpcResponse {
    pub openings: Vec<[LongOpening; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpcTranscript {
    pub reps: usize,
    pub rmsg: ReceiverMsg,
    pub commit: MpcCommit,
    pub challenge: MpcChallenge,
    pub response: MpcResponse,
}

/// What the prover keeps between its two messages.
#[derive(Debug, Clone)]
pub struct MpcProverState {
    openings: Vec<[LongOpening; PARTIES]>,
}

impl MpcProverState {
    pub fn respond(&self, ch: &MpcChallenge) -> Result<MpcResponse> {
        if ch.trits.len() != self.openings.len() || ch.trits.iter().any(|&e| e as usize >= PARTIES) {
            return Err(Error::Format(format!(
                "{} challenge trits for {} repetitions",
                ch.trits.len(),
                self.openings.len()
            )));
        }
        Ok(MpcResponse {
            openings: ch
                .trits
                .iter()
                .zip(&self.openings)
                .map(|(&e, o)| {
                    let e = e as usize;
                    [o[e].clone(), o[(e + 1) % PARTIES].clone()]
                })
                .collect(),
        })
    }
}

/// In-place transpose of a 64×64 bit matrix: bit c of row r moves to bit
/// r of row c.
pub fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32;
    let mut m: u64 = 0x0000_0000_FFFF_FFFF;
    while j != 0 {
        let mut k = 0;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k] ^= t << j;
            a[k + j] ^= t;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Per-lane bit strings (packed words) → bitsliced words.
fn slice_lanes(lanes: &[Vec<u64>], nbits: usize) -> Vec<u64> {
    let chunks = nbits.div_ceil(64);
    let mut out = Vec::with_capacity(chunks * 64);
    for c in 0..chunks {
        let mut m = [0u64; 64];
        for (r, lane) in lanes.iter().enumerate() {
            m[r] = lane.get(c).copied().unwrap_or(0);
        }
        transpose64(&mut m);
        out.extend_from_slice(&m);
    }
    out.truncate(nbits);
    out
}

/// Bitsliced words → per-lane packed words.
fn unslice_lanes(words: &[u64], lanes: usize) -> Vec<Vec<u64>> {
    let chunks = words.len().div_ceil(64);
    let mut out = vec![Vec::with_capacity(chunks); lanes];
    for c in 0..chunks {
        let mut m = [0u64; 64];
        let part = &words[c * 64..words.len().min(c * 64 + 64)];
        m[..part.len()].copy_from_slice(part);
        transpose64(&mut m);
        for (r, lane) in out.iter_mut().enumerate() {
            lane.push(m[r]);
        }
    }
    out
}

/// Random tape bits of each lane's seed, bitsliced.
fn tape_words(seeds: &[u64], nbits: usize) -> Vec<u64> {
    let arx: Vec<Arx> = seeds.iter().map(|&s| Arx::new(s)).collect();
    let lanes: Vec<Vec<u64>> = arx
        .iter()
        .map(|a| {
            (0..nbits.div_ceil(64))
                .map(|c| a.block(2 * c as u32) as u64 | (a.block(2 * c as u32 + 1) as u64) << 32)
                .collect()
        })
        .collect();
    slice_lanes(&lanes, nbits)
}

fn bits_to_words(b: &Bits, start_byte: usize, nbits: usize) -> Vec<u64> {
    let bytes = &b.as_bytes()[start_byte..];
    let mut out = vec![0u64; nbits.div_ceil(64)];
    for (i, &byte) in bytes.iter().take(nbits.div_ceil(8)).enumerate() {
        out[i / 8] |= (byte as u64) << (8 * (i % 8));
    }
    if nbits % 64 != 0 {
        let last = out.len() - 1;
        out[last] &= (1u64 << (nbits % 64)) - 1;
    }
    out
}

fn words_to_bits(words: &[u64], nbits: usize) -> Bits {
    let mut bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    bytes.truncate(nbits.div_ceil(8));
    if nbits % 8 != 0 {
        *bytes.last_mut().expect("nonempty") &= (1u8 << (nbits % 8)) - 1;
    }
    Bits::from_bytes(bytes, nbits).expect("tail cleared")
}

fn lane_mask(lanes: usize) -> u64 {
    if lanes == 64 {
        u64::MAX
    } else {
        (1u64 << lanes) - 1
    }
}

/// View layout: seed (64 bits), AND outputs, then party 2's input share.
fn view_len(c: &BoolCircuit, party: usize) -> usize {
    SEED_BITS + c.and_count() + if party == 2 { c.num_inputs() } else { 0 }
}

fn last_and(c: &BoolCircuit) -> Option<usize> {
    c.and_count().checked_sub(1)
}

/// Runs one batch of at most 64 repetitions. `flip[r] = Some(p)` flips
/// party p's output of the last AND gate in lane r.
fn prove_batch(c: &BoolCircuit, w: &Bits, seeds: &[[u64; PARTIES]], flip: &[Option<usize>]) -> Vec<([Bits; PARTIES], [bool; PARTIES])> {
    let lanes = seeds.len();
    let n_in = c.num_inputs();
    let n_and = c.and_count();
    let tape_len = n_in + n_and;
    let tapes: [Vec<u64>; PARTIES] =
        std::array::from_fn(|p| tape_words(&seeds.iter().map(|s| s[p]).collect::<Vec<_>>(), tape_len));
    let mut fm = [0u64; PARTIES];
    for (r, f) in flip.iter().enumerate() {
        if let Some(p) = f {
            fm[*p] |= 1 << r;
        }
    }
    let mut sh: [Vec<u64>; PARTIES] = std::array::from_fn(|_| Vec::with_capacity(c.num_wires()));
    for i in 0..n_in {
        let wv = if w.get(i) { u64::MAX } else { 0 };
        let (s0, s1) = (tapes[0][i], tapes[1][i]);
        sh[0].push(s0);
        sh[1].push(s1);
        sh[2].push(wv ^ s0 ^ s1);
    }
    let mut and_out: [Vec<u64>; PARTIES] = std::array::from_fn(|_| Vec::with_capacity(n_and));
    let last = last_and(c);
    let mut k = 0;
    for op in c.gates() {
        match *op {
            GateOp::Xor(a, b) => {
                for s in sh.iter_mut() {
                    let v = s[a as usize] ^ s[b as usize];
                    s.push(v);
                }
            }
            GateOp::Not(a) => {
                for (p, s) in sh.iter_mut().enumerate() {
                    let v = if p == 0 { !s[a as usize] } else { s[a as usize] };
                    s.push(v);
                }
            }
            GateOp::Const(v) => {
                for (p, s) in sh.iter_mut().enumerate() {
                    s.push(if p == 0 && v { u64::MAX } else { 0 });
                }
            }
            GateOp::And(a, b) => {
                let x: [u64; PARTIES] = std::array::from_fn(|p| sh[p][a as usize]);
                let y: [u64; PARTIES] = std::array::from_fn(|p| sh[p][b as usize]);
                for p in 0..PARTIES {
                    let q = (p + 1) % PARTIES;
                    let mut z = (x[p] & y[p]) ^ (x[q] & y[p]) ^ (x[p] & y[q]) ^ tapes[p][n_in + k] ^ tapes[q][n_in + k];
                    if Some(k) == last {
                        z ^= fm[p];
                    }
                    sh[p].push(z);
                    and_out[p].push(z);
                }
                k += 1;
            }
        }
    }
    let out = c.output() as usize;
    let ands: [Vec<Vec<u64>>; PARTIES] = std::array::from_fn(|p| unslice_lanes(&and_out[p], lanes));
    let share2 = unslice_lanes(&sh[2][..n_in], lanes);
    (0..lanes)
        .map(|r| {
            let views = std::array::from_fn(|p| {
                let mut v = Bits::from_u64(seeds[r][p], SEED_BITS);
                v.extend_from(&words_to_bits(&ands[p][r], n_and));
                if p == 2 {
                    v.extend_from(&words_to_bits(&share2[r], n_in));
                }
                v
            });
            let ys = std::array::from_fn(|p| sh[p][out] >> r & 1 == 1);
            (views, ys)
        })
        .collect()
}

fn commit_views<R: Rng + ?Sized>(
    c: &BoolCircuit,
    w: &Bits,
    rmsg: &ReceiverMsg,
    reps: usize,
    cheat: bool,
    rng: &mut R,
) -> Result<(MpcCommit, MpcProverState)> {
    if reps == 0 {
        return Err(Error::Config("at least one repetition".into()));
    }
    if w.len() != c.num_inputs() {
        return Err(Error::Dimension(format!(
            "{} witness bits for {} inputs",
            w.len(),
            c.num_inputs()
        )));
    }
    let mut views = Vec::with_capacity(reps);
    let mut outputs = Vec::with_capacity(reps);
    let mut openings = Vec::with_capacity(reps);
    for start in (0..reps).step_by(64) {
        let lanes = (reps - start).min(64);
        let seeds: Vec<[u64; PARTIES]> = (0..lanes).map(|_| rng.gen()).collect();
        let flip: Vec<Option<usize>> = (0..lanes)
            .map(|_| (cheat && last_and(c).is_some()).then(|| rng.gen_range(0..PARTIES)))
            .collect();
        for (vs, ys) in prove_batch(c, w, &seeds, &flip) {
            let mut coms = Vec::with_capacity(PARTIES);
            let mut opens = Vec::with_capacity(PARTIES);
            for v in &vs {
                let (com, open) = commit_long(rmsg, v, rng)?;
                coms.push(com);
                opens.push(open);
            }
            views.push(coms.try_into().expect("three parties"));
            openings.push(opens.try_into().expect("three parties"));
            outputs.push(ys);
        }
    }
    Ok((MpcCommit { views, outputs }, MpcProverState { openings }))
}

/// First prover message for a witness satisfying `c`.
pub fn mpc_commit<R: Rng + ?Sized>(
    c: &BoolCircuit,
    w: &Bits,
    rmsg: &ReceiverMsg,
    reps: usize,
    rng: &mut R,
) -> Result<(MpcCommit, MpcProverState)> {
    commit_views(c, w, rmsg, reps, false, rng)
}

/// Best generic cheat without a witness: run on `w` and flip one random
/// party's share of the last AND gate, so exactly one of the three
/// challenges exposes the repetition.
pub fn mpc_commit_cheating<R: Rng + ?Sized>(
    c: &BoolCircuit,
    w: &Bits,
    rmsg: &ReceiverMsg,
    reps: usize,
    rng: &mut R,
) -> Result<(MpcCommit, MpcProverState)> {
    commit_views(c, w, rmsg, reps, true, rng)
}

struct Opened {
    e: usize,
    a: Bits,
    b: Bits,
    ys: [bool; PARTIES],
}

fn verify_batch(c: &BoolCircuit, batch: &[Opened]) -> bool {
    let lanes = batch.len();
    let n_in = c.num_inputs();
    let n_and = c.and_count();
    let (mut a0, mut a2, mut b0, mut b2) = (0u64, 0u64, 0u64, 0u64);
    for (r, o) in batch.iter().enumerate() {
        match o.e {
            0 => a0 |= 1 << r,
            1 => b2 |= 1 << r,
            _ => {
                a2 |= 1 << r;
                b0 |= 1 << r;
            }
        }
    }
    let seeds_a: Vec<u64> = batch.iter().map(|o| o.a.to_u64_range(0, SEED_BITS)).collect();
    let seeds_b: Vec<u64> = batch.iter().map(|o| o.b.to_u64_range(0, SEED_BITS)).collect();
    let tape_a = tape_words(&seeds_a, n_in + n_and);
    let tape_b = tape_words(&seeds_b, n_in + n_and);
    let and_a = slice_lanes(
        &batch.iter().map(|o| bits_to_words(&o.a, SEED_BITS / 8, n_and)).collect::<Vec<_>>(),
        n_and,
    );
    let and_b = slice_lanes(
        &batch.iter().map(|o| bits_to_words(&o.b, SEED_BITS / 8, n_and)).collect::<Vec<_>>(),
        n_and,
    );
    let share = |v: &Bits, is2: bool| {
        if is2 {
            let s = v.slice(SEED_BITS + n_and, SEED_BITS + n_and + n_in);
            bits_to_words(&s, 0, n_in)
        } else {
            vec![]
        }
    };
    let share_a = slice_lanes(&batch.iter().map(|o| share(&o.a, o.e == 2)).collect::<Vec<_>>(), n_in);
    let share_b = slice_lanes(&batch.iter().map(|o| share(&o.b, o.e == 1)).collect::<Vec<_>>(), n_in);

    let mut wa = Vec::with_capacity(c.num_wires());
    let mut wb = Vec::with_capacity(c.num_wires());
    for i in 0..n_in {
        wa.push((tape_a[i] & !a2) | (share_a[i] & a2));
        wb.push((tape_b[i] & !b2) | (share_b[i] & b2));
    }
    let mut bad = 0u64;
    let mut k = 0;
    for op in c.gates() {
        match *op {
            GateOp::Xor(x, y) => {
                wa.push(wa[x as usize] ^ wa[y as usize]);
                wb.push(wb[x as usize] ^ wb[y as usize]);
            }
            GateOp::Not(x) => {
                wa.push(wa[x as usize] ^ a0);
                wb.push(wb[x as usize] ^ b0);
            }
            GateOp::Const(v) => {
                wa.push(if v { a0 } else { 0 });
                wb.push(if v { b0 } else { 0 });
            }
            GateOp::And(x, y) => {
                let (xa, ya, xb, yb) = (wa[x as usize], wa[y as usize], wb[x as usize], wb[y as usize]);
                let z = (xa & ya) ^ (xb & ya) ^ (xa & yb) ^ tape_a[n_in + k] ^ tape_b[n_in + k];
                bad |= z ^ and_a[k];
                wa.push(and_a[k]);
                wb.push(and_b[k]);
                k += 1;
            }
        }
    }
    let out = c.output() as usize;
    for (r, o) in batch.iter().enumerate() {
        let ya = wa[out] >> r & 1 == 1;
        let yb = wb[out] >> r & 1 == 1;
        let ok = ya == o.ys[o.e] && yb == o.ys[(o.e + 1) % PARTIES] && o.ys.iter().filter(|&&y| y).count() % 2 == 1;
        if !ok {
            bad |= 1 << r;
        }
    }
    bad & lane_mask(lanes) == 0
}

/// Verdict on a complete exchange. Shape errors are `Format` errors; a
/// well-formed but wrong proof is `Ok(false)`.
pub fn mpc_verify(
    c: &BoolCircuit,
    rmsg: &ReceiverMsg,
    commit: &MpcCommit,
    ch: &MpcChallenge,
    resp: &MpcResponse,
) -> Result<bool> {
    let reps = ch.trits.len();
    if reps == 0 || commit.views.len() != reps || commit.outputs.len() != reps || resp.openings.len() != reps {
        return Err(Error::Format("repetition counts disagree".into()));
    }
    let mut opened = Vec::with_capacity(64);
    for r in 0..reps {
        let e = ch.trits[r] as usize;
        if e >= PARTIES {
            return Err(Error::Format(format!("challenge {e} is not a party")));
        }
        let f = (e + 1) % PARTIES;
        let va = open_long(rmsg, &commit.views[r][e], &resp.openings[r][0])?;
        let vb = open_long(rmsg, &commit.views[r][f], &resp.openings[r][1])?;
        let (Some(a), Some(b)) = (va, vb) else {
            return Ok(false);
        };
        if a.len() != view_len(c, e) || b.len() != view_len(c, f) {
            return Ok(false);
        }
        opened.push(Opened {
            e,
            a,
            b,
            ys: commit.outputs[r],
        });
        if opened.len() == 64 || r + 1 == reps {
            if !verify_batch(c, &opened) {
                return Ok(false);
            }
            opened.clear();
        }
    }
    Ok(true)
}

pub fn mpc_verify_transcript(c: &BoolCircuit, tr: &MpcTranscript) -> Result<bool> {
    if tr.reps != tr.challenge.trits.len() {
        return Err(Error::Format("repetition count disagrees with challenge".into()));
    }
    mpc_verify(c, &tr.rmsg, &tr.commit, &tr.challenge, &tr.response)
}

#[cfg(test)]
mod tests {
    use super::super::circuit::Builder;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transpose_moves_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let orig: [u64; 64] = std::array::from_fn(|_| rng.gen());
        let mut t = orig;
        transpose64(&mut t);
        for r in 0..64 {
            for c in 0..64 {
                assert_eq!(orig[r] >> c & 1, t[c] >> r & 1);
            }
        }
    }

    #[test]
    fn repetition_count_for_forty_bits() {
        assert_eq!(reps_for_soundness(40), 69);
        assert!(1.5f64.powi(69) >= 2f64.powi(40));
        assert!(1.5f64.powi(68) < 2f64.powi(40));
    }

    fn majority_circuit() -> BoolCircuit {
        let mut b = Builder::new();
        let x = b.inputs("x", 3);
        let ab = b.and(x[0], x[1]);
        let ac = b.and(x[0], x[2]);
        let bc = b.and(x[1], x[2]);
        let t = b.xor(ab, ac);
        let m = b.xor(t, bc);
        let n = b.not(m);
        let o = b.xor(n, crate::wi::circuit::Lit::Const(true));
        b.finish(o)
    }

    #[test]
    fn honest_proofs_verify_across_batches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = majority_circuit();
        let rmsg = ReceiverMsg::sample(8, &mut rng).unwrap();
        let w = Bits::parse("110").unwrap();
        let (com, st) = mpc_commit(&c, &w, &rmsg, 130, &mut rng).unwrap();
        let ch = MpcChallenge::sample(130, &mut rng);
        let resp = st.respond(&ch).unwrap();
        assert!(mpc_verify(&c, &rmsg, &com, &ch, &resp).unwrap());
    }

    #[test]
    fn false_witness_is_caught() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = majority_circuit();
        let rmsg = ReceiverMsg::sample(8, &mut rng).unwrap();
        let w = Bits::parse("100").unwrap();
        let (com, st) = mpc_commit(&c, &w, &rmsg, 20, &mut rng).unwrap();
        let ch = MpcChallenge::sample(20, &mut rng);
        assert!(!mpc_verify(&c, &rmsg, &com, &ch, &st.respond(&ch).unwrap()).unwrap());
    }
}
