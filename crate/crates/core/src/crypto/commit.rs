//! Naor-style two-message commitments: the receiver sends r ∈ {0,1}^{3λ},
//! the committer sends G(s) ⊕ b·r for each bit b.
//!
//! Two seed layouts are supported. Per-bit commitments draw a fresh λ-bit
//! seed for every bit. Shared-seed commitments expand one λ-bit seed to
//! 3λ·L bits and mask block j with r when m_j = 1; binding still fails only
//! on the ≤ 2^{2λ}/2^{3λ} fraction of r for which two seeds collide.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::prg::{prg_expand, Arx};
use crate::bits::Bits;
use crate::error::{Error, Result};

pub const MAX_LAMBDA: usize = 24;

pub fn check_lambda(lambda: usize) -> Result<()> {
    if lambda == 0 || lambda > MAX_LAMBDA {
        return Err(Error::Config(format!(
            "security parameter {lambda} outside 1..={MAX_LAMBDA}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawReceiverMsg")]
pub struct ReceiverMsg {
    lambda: usize,
    r: Bits,
}

#[derive(Deserialize)]
struct RawReceiverMsg {
    lambda: usize,
    r: Bits,
}

impl TryFrom<RawReceiverMsg> for ReceiverMsg {
    type Error = Error;

    fn try_from(m: RawReceiverMsg) -> Result<Self> {
        ReceiverMsg::from_bits(m.lambda, m.r)
    }
}

impl ReceiverMsg {
    pub fn sample<R: Rng + ?Sized>(lambda: usize, rng: &mut R) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(ReceiverMsg {
            lambda,
            r: Bits::random(3 * lambda, rng),
        })
    }

    pub fn from_bits(lambda: usize, r: Bits) -> Result<Self> {
        check_lambda(lambda)?;
        if r.len() != 3 * lambda {
            return Err(Error::Format(format!(
                "receiver message of {} bits, expected {}",
                r.len(),
                3 * lambda
            )));
        }
        Ok(ReceiverMsg { lambda, r })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn bits(&self) -> &Bits {
        &self.r
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCommitment")]
pub struct Commitment {
    lambda: usize,
    bits: Bits,
}

#[derive(Deserialize)]
struct RawCommitment {
    lambda: usize,
    bits: Bits,
}

impl TryFrom<RawCommitment> for Commitment {
    type Error = Error;

    fn try_from(c: RawCommitment) -> Result<Self> {
        Commitment::from_bits(c.lambda, c.bits)
    }
}

impl Commitment {
    pub fn from_bits(lambda: usize, bits: Bits) -> Result<Self> {
        check_lambda(lambda)?;
        if bits.len() % (3 * lambda) != 0 {
            return Err(Error::Format(format!(
                "commitment of {} bits is not a multiple of {}",
                bits.len(),
                3 * lambda
            )));
        }
        Ok(Commitment { lambda, bits })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    /// Number of committed bits.
    pub fn message_len(&self) -> usize {
        self.bits.len() / (3 * self.lambda)
    }

    pub fn block(&self, j: usize) -> Bits {
        let w = 3 * self.lambda;
        self.bits.slice(j * w, (j + 1) * w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub message: Bits,
    pub randomness: Bits,
}

fn same_lambda(rmsg: &ReceiverMsg, lambda: usize) -> Result<()> {
    if rmsg.lambda != lambda {
        return Err(Error::Format(format!(
            "receiver message for λ={} used with λ={lambda}",
            rmsg.lambda
        )));
    }
    Ok(())
}

pub fn commit_bit(rmsg: &ReceiverMsg, b: bool, seed: &Bits) -> Result<Commitment> {
    commit_bits(rmsg, &Bits::from_bools(&[b]), seed)
}

/// Per-bit commitment; `seeds` holds λ bits for each message bit.
pub fn commit_bits(rmsg: &ReceiverMsg, msg: &Bits, seeds: &Bits) -> Result<Commitment> {
    let lambda = rmsg.lambda;
    if seeds.len() != lambda * msg.len() {
        return Err(Error::Format(format!(
            "{} seed bits for {} message bits at λ={lambda}",
            seeds.len(),
            msg.len()
        )));
    }
    let mut out = Bits::new();
    for j in 0..msg.len() {
        let mut block = prg_expand(&seeds.slice(j * lambda, (j + 1) * lambda), 3 * lambda);
        if msg.get(j) {
            block.xor_in_place(&rmsg.r);
        }
        out.extend_from(&block);
    }
    Ok(Commitment { lambda, bits: out })
}

/// Shared-seed commitment: one λ-bit seed covers the whole message.
pub fn commit_shared(rmsg: &ReceiverMsg, msg: &Bits, seed: &Bits) -> Result<Commitment> {
    let lambda = rmsg.lambda;
    if seed.len() != lambda {
        return Err(Error::Format(format!(
            "shared seed of {} bits at λ={lambda}",
            seed.len()
        )));
    }
    let w = 3 * lambda;
    let mut out = prg_expand(seed, w * msg.len());
    for j in 0..msg.len() {
        if msg.get(j) {
            for t in 0..w {
                if rmsg.r.get(t) {
                    out.set(j * w + t, !out.get(j * w + t));
                }
            }
        }
    }
    Ok(Commitment { lambda, bits: out })
}

/// Commits with fresh per-bit seeds and returns the opening.
pub fn commit_random<R: Rng + ?Sized>(
    rmsg: &ReceiverMsg,
    msg: &Bits,
    rng: &mut R,
) -> Result<(Commitment, Opening)> {
    let seeds = Bits::random(rmsg.lambda * msg.len(), rng);
    let c = commit_bits(rmsg, msg, &seeds)?;
    Ok((
        c,
        Opening {
            message: msg.clone(),
            randomness: seeds,
        },
    ))
}

fn check_shapes(rmsg: &ReceiverMsg, c: &Commitment, opening: &Opening, seed_bits: usize) -> Result<()> {
    same_lambda(rmsg, c.lambda)?;
    if opening.message.len() != c.message_len() {
        return Err(Error::Format(format!(
            "opening of {} bits for a {}-bit commitment",
            opening.message.len(),
            c.message_len()
        )));
    }
    if opening.randomness.len() != seed_bits {
        return Err(Error::Format(format!(
            "{} randomness bits, expected {seed_bits}",
            opening.randomness.len()
        )));
    }
    Ok(())
}

/// Accepts iff recommitting the opening reproduces `c` (per-bit seeds).
pub fn verify_open(rmsg: &ReceiverMsg, c: &Commitment, opening: &Opening) -> Result<bool> {
    check_shapes(rmsg, c, opening, rmsg.lambda * c.message_len())?;
    Ok(commit_bits(rmsg, &opening.message, &opening.randomness)? == *c)
}

/// Accepts iff recommitting the opening reproduces `c` (shared seed).
pub fn verify_open_shared(rmsg: &ReceiverMsg, c: &Commitment, opening: &Opening) -> Result<bool> {
    check_shapes(rmsg, c, opening, rmsg.lambda)?;
    Ok(commit_shared(rmsg, &opening.message, &opening.randomness)? == *c)
}

fn decide(block: &Bits, pad: &Bits, r: &Bits) -> Option<bool> {
    if block == pad {
        Some(false)
    } else if block.xor(pad) == *r {
        Some(true)
    } else {
        None
    }
}

/// Recovers the committed message from the per-bit seeds alone; `None`
/// when some block matches neither value.
pub fn recover_message(rmsg: &ReceiverMsg, c: &Commitment, randomness: &Bits) -> Result<Option<Bits>> {
    same_lambda(rmsg, c.lambda)?;
    let lambda = rmsg.lambda;
    let l = c.message_len();
    if randomness.len() != lambda * l {
        return Err(Error::Format(format!(
            "{} randomness bits for {l} committed bits",
            randomness.len()
        )));
    }
    let mut out = Bits::zeros(l);
    for j in 0..l {
        let pad = prg_expand(&randomness.slice(j * lambda, (j + 1) * lambda), 3 * lambda);
        match decide(&c.block(j), &pad, &rmsg.r) {
            Some(b) => out.set(j, b),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Shared-seed counterpart of [`recover_message`].
pub fn recover_message_shared(rmsg: &ReceiverMsg, c: &Commitment, seed: &Bits) -> Result<Option<Bits>> {
    same_lambda(rmsg, c.lambda)?;
    let lambda = rmsg.lambda;
    if seed.len() != lambda {
        return Err(Error::Format(format!("shared seed of {} bits", seed.len())));
    }
    let w = 3 * lambda;
    let l = c.message_len();
    let pad = prg_expand(seed, w * l);
    let mut out = Bits::zeros(l);
    for j in 0..l {
        match decide(&c.block(j), &pad.slice(j * w, (j + 1) * w), &rmsg.r) {
            Some(b) => out.set(j, b),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Commitment to a long string: a shared-seed commitment to a fresh λ-bit
/// key plus the data masked by the key's PRG stream. Binding reduces to the
/// key commitment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongCommitment {
    pub key: Commitment,
    pub masked: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongOpening {
    pub key: Bits,
    pub seed: Bits,
}

pub fn commit_long<R: Rng + ?Sized>(
    rmsg: &ReceiverMsg,
    data: &Bits,
    rng: &mut R,
) -> Result<(LongCommitment, LongOpening)> {
    let lambda = rmsg.lambda;
    let key = Bits::random(lambda, rng);
    let seed = Bits::random(lambda, rng);
    let kc = commit_shared(rmsg, &key, &seed)?;
    let masked = data.xor(&Arx::new(key.to_u64()).stream(0, data.len()));
    Ok((LongCommitment { key: kc, masked }, LongOpening { key, seed }))
}

/// The committed data, or `None` if the key opening is invalid.
pub fn open_long(rmsg: &ReceiverMsg, c: &LongCommitment, opening: &LongOpening) -> Result<Option<Bits>> {
    let o = Opening {
        message: opening.key.clone(),
        randomness: opening.seed.clone(),
    };
    if c.key.message_len() != rmsg.lambda || !verify_open_shared(rmsg, &c.key, &o)? {
        return Ok(None);
    }
    Ok(Some(c.masked.xor(&Arx::new(opening.key.to_u64()).stream(0, c.masked.len()))))
}

/// Largest λ for which [`binding_exhaustive`] finishes at desk scale.
pub const MAX_EXHAUSTIVE_LAMBDA: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingCount {
    pub lambda: usize,
    /// Receiver messages examined: all 2^{3λ} of them.
    pub receiver_msgs: u64,
    /// Receiver messages with some (s₁, s₂) opening one commitment both ways.
    pub equivocable: u64,
}

impl BindingCount {
    pub fn fraction(&self) -> f64 {
        self.equivocable as f64 / self.receiver_msgs as f64
    }
}

/// Runs commit_bit over every r and every seed pair (s₁, s₂), counting the
/// r for which commit(r, 0, s₁) = commit(r, 1, s₂).
pub fn binding_exhaustive(lambda: usize) -> Result<BindingCount> {
    check_lambda(lambda)?;
    if lambda > MAX_EXHAUSTIVE_LAMBDA {
        return Err(Error::Config(format!(
            "exhaustive binding needs λ ≤ {MAX_EXHAUSTIVE_LAMBDA}, got {lambda}"
        )));
    }
    let seeds: Vec<Bits> = (0..1u64 << lambda).map(|s| Bits::from_u64(s, lambda)).collect();
    let mut equivocable = 0;
    for r in 0..1u64 << (3 * lambda) {
        let rmsg = ReceiverMsg::from_bits(lambda, Bits::from_u64(r, 3 * lambda))?;
        let zeros = seeds
            .iter()
            .map(|s| commit_bit(&rmsg, false, s))
            .collect::<Result<Vec<_>>>()?;
        let ones = seeds
            .iter()
            .map(|s| commit_bit(&rmsg, true, s))
            .collect::<Result<Vec<_>>>()?;
        if zeros.iter().any(|c0| ones.contains(c0)) {
            equivocable += 1;
        }
    }
    Ok(BindingCount {
        lambda,
        receiver_msgs: 1 << (3 * lambda),
        equivocable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn commit_zero_is_the_pad_and_one_adds_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rm = ReceiverMsg::sample(8, &mut rng).unwrap();
        let s = Bits::random(8, &mut rng);
        let c0 = commit_bit(&rm, false, &s).unwrap();
        assert_eq!(*c0.bits(), prg_expand(&s, 24));
        let c1 = commit_bit(&rm, true, &s).unwrap();
        assert_eq!(c1.bits().xor(rm.bits()), prg_expand(&s, 24));
    }

    #[test]
    fn open_and_recover_both_layouts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rm = ReceiverMsg::sample(16, &mut rng).unwrap();
        let msg = Bits::random(13, &mut rng);
        let (c, o) = commit_random(&rm, &msg, &mut rng).unwrap();
        assert!(verify_open(&rm, &c, &o).unwrap());
        assert_eq!(recover_message(&rm, &c, &o.randomness).unwrap(), Some(msg.clone()));

        let seed = Bits::random(16, &mut rng);
        let cs = commit_shared(&rm, &msg, &seed).unwrap();
        let os = Opening { message: msg.clone(), randomness: seed.clone() };
        assert!(verify_open_shared(&rm, &cs, &os).unwrap());
        assert_eq!(recover_message_shared(&rm, &cs, &seed).unwrap(), Some(msg));

        let mut bad = o.clone();
        bad.message.set(0, !bad.message.get(0));
        assert!(!verify_open(&rm, &c, &bad).unwrap());
        let short = Opening { message: Bits::zeros(2), randomness: Bits::zeros(32) };
        assert!(matches!(verify_open(&rm, &c, &short), Err(Error::Format(_))));
    }

    #[test]
    fn single_bit_layouts_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rm = ReceiverMsg::sample(8, &mut rng).unwrap();
        let s = Bits::random(8, &mut rng);
        let m = Bits::parse("1").unwrap();
        assert_eq!(commit_bits(&rm, &m, &s).unwrap(), commit_shared(&rm, &m, &s).unwrap());
    }

    #[test]
    fn long_commitment_roundtrip_and_key_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rm = ReceiverMsg::sample(12, &mut rng).unwrap();
        let data = Bits::random(1000, &mut rng);
        let (c, o) = commit_long(&rm, &data, &mut rng).unwrap();
        assert_eq!(open_long(&rm, &c, &o).unwrap(), Some(data));
        let mut wrong = o.clone();
        wrong.key.set(3, !wrong.key.get(3));
        assert_eq!(open_long(&rm, &c, &wrong).unwrap(), None);
    }

    #[test]
    fn empty_message_recovers_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rm = ReceiverMsg::sample(4, &mut rng).unwrap();
        let c = commit_bits(&rm, &Bits::new(), &Bits::new()).unwrap();
        assert_eq!(recover_message(&rm, &c, &Bits::new()).unwrap(), Some(Bits::new()));
    }
}
