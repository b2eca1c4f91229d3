//! The WI-phase relation as a single Boolean circuit: a Hamiltonian cycle
//! of x, or a trapdoor (r*, r, i*) that opens c* to r* and c** to
//! (i*, α_{i*,0} ⊕ α_{i*,1}) with shared seed r*.

use serde::{Deserialize, Serialize};

use super::circuit::{BoolCircuit, Builder, Lit};
use super::graph::Graph;
use crate::bits::Bits;
use crate::crypto::commit::{check_lambda, Commitment, ReceiverMsg};
use crate::crypto::prg::{key_rotation, ALPHA, BETA, IV_X, IV_Y, ROUNDS, ROUND_CONSTANTS};
use crate::error::{Error, Result};

/// Width of the i* field: ⌈log₂ λ⌉ bits, LSB first.
pub fn index_bits(lambda: usize) -> usize {
    if lambda <= 1 {
        0
    } else {
        (usize::BITS - (lambda - 1).leading_zeros()) as usize
    }
}

/// The c** message (i*, β): i* in `index_bits(λ)` bits, then β.
pub fn encode_trapdoor_message(lambda: usize, istar: usize, beta: &Bits) -> Bits {
    let mut m = Bits::from_u64(istar as u64, index_bits(lambda));
    m.extend_from(beta);
    m
}

type Word = [Lit; 16];

fn const_word(v: u16) -> Word {
    std::array::from_fn(|t| Lit::Const(v >> t & 1 == 1))
}

fn xor_word(b: &mut Builder, x: &Word, y: &Word) -> Word {
    std::array::from_fn(|t| b.xor(x[t], y[t]))
}

fn add_word(b: &mut Builder, x: &Word, y: &Word) -> Word {
    let mut out = [Lit::Const(false); 16];
    let mut carry = Lit::Const(false);
    for t in 0..16 {
        let xy = b.xor(x[t], y[t]);
        out[t] = b.xor(xy, carry);
        if t < 15 {
            // majority(x, y, c) = ((x ⊕ c) ∧ (y ⊕ c)) ⊕ c
            let xc = b.xor(x[t], carry);
            let yc = b.xor(y[t], carry);
            let m = b.and(xc, yc);
            carry = b.xor(m, carry);
        }
    }
    out
}

/// The ARX PRG with a symbolic key of at most 64 bits; unused key bits are 0.
pub struct ArxGadget {
    round_keys: Vec<Word>,
}

impl ArxGadget {
    pub fn new(b: &mut Builder, key: &[Lit]) -> Self {
        assert!(key.len() <= 64);
        let bit = |i: usize| key.get(i).copied().unwrap_or(Lit::Const(false));
        let round_keys = (0..ROUNDS)
            .map(|r| {
                let mut w = const_word(ROUND_CONSTANTS[r]);
                for word in 0..4 {
                    let rot = key_rotation(word, r) as usize;
                    for (t, wt) in w.iter_mut().enumerate() {
                        // rotl by rot: output bit t reads input bit t − rot
                        let src = 16 * word + (t + 16 - rot) % 16;
                        *wt = b.xor(*wt, bit(src));
                    }
                }
                w
            })
            .collect();
        ArxGadget { round_keys }
    }

    fn block(&self, b: &mut Builder, j: u32) -> Vec<Lit> {
        let mut x = const_word(j as u16 ^ IV_X);
        let mut y = const_word((j >> 16) as u16 ^ IV_Y);
        for k in &self.round_keys {
            let xr: Word = std::array::from_fn(|t| x[(t + ALPHA as usize) % 16]);
            let s = add_word(b, &xr, &y);
            x = xor_word(b, &s, k);
            let yr: Word = std::array::from_fn(|t| y[(t + 16 - BETA as usize) % 16]);
            y = xor_word(b, &yr, &x);
        }
        x.iter().chain(y.iter()).copied().collect()
    }

    /// First `len` stream bits, matching `Arx::stream(0, len)`.
    pub fn stream(&self, b: &mut Builder, len: usize) -> Vec<Lit> {
        let mut out = Vec::with_capacity(len.div_ceil(32) * 32);
        for j in 0..len.div_ceil(32) {
            out.extend(self.block(b, j as u32));
        }
        out.truncate(len);
        out
    }
}

/// Public data of the WI-phase statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundStatement {
    pub graph: Graph,
    pub lambda: usize,
    pub rmsg_star: ReceiverMsg,
    pub c_star: Commitment,
    pub rmsg_2star: ReceiverMsg,
    pub c_2star: Commitment,
    /// α_{i,0}, α_{i,1} for i < λ.
    pub alphas: Vec<[Bits; 2]>,
}

impl CompoundStatement {
    pub fn validate(&self) -> Result<()> {
        let l = self.lambda;
        check_lambda(l)?;
        if self.alphas.len() != l || self.alphas.iter().any(|a| a[0].len() != l || a[1].len() != l) {
            return Err(Error::Format(format!("α table is not {l}×2 strings of {l} bits")));
        }
        for (name, r) in [("c*", &self.rmsg_star), ("c**", &self.rmsg_2star)] {
            if r.lambda() != l {
                return Err(Error::Format(format!("{name} receiver message at wrong λ")));
            }
        }
        if self.c_star.lambda() != l || self.c_star.message_len() != l {
            return Err(Error::Format("c* must commit λ bits".into()));
        }
        if self.c_2star.lambda() != l || self.c_2star.message_len() != index_bits(l) + l {
            return Err(Error::Format("c** has the wrong message width".into()));
        }
        Ok(())
    }

    pub fn beta(&self, i: usize) -> Bits {
        self.alphas[i][0].xor(&self.alphas[i][1])
    }
}

/// Witness for the compound circuit. Unused branches are zero inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompoundWitness {
    Cycle(Vec<usize>),
    Trapdoor { rstar: Bits, rseeds: Bits, istar: usize },
    /// Arbitrary input bits, used by cheating provers.
    Raw(Bits),
}

/// Input layout: cycle matrix P (v×v, P[p·v + a] = 1 iff position p
/// visits a), then r*, then the λ per-bit seeds of c*, then i*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputLayout {
    pub vertices: usize,
    pub lambda: usize,
}

impl InputLayout {
    pub fn cycle_len(&self) -> usize {
        self.vertices * self.vertices
    }

    pub fn total(&self) -> usize {
        self.cycle_len() + self.lambda + self.lambda * self.lambda + index_bits(self.lambda)
    }

    pub fn encode(&self, w: &CompoundWitness) -> Result<Bits> {
        let (v, l) = (self.vertices, self.lambda);
        let mut bits = Bits::zeros(self.total());
        match w {
            CompoundWitness::Cycle(cycle) => {
                if cycle.len() != v || cycle.iter().any(|&a| a >= v) {
                    return Err(Error::Format("cycle does not list every vertex".into()));
                }
                for (p, &a) in cycle.iter().enumerate() {
                    bits.set(p * v + a, true);
                }
            }
            CompoundWitness::Trapdoor { rstar, rseeds, istar } => {
                if rstar.len() != l || rseeds.len() != l * l || *istar >= l.max(1) {
                    return Err(Error::Format("trapdoor witness has the wrong shape".into()));
                }
                let mut off = self.cycle_len();
                for part in [rstar, rseeds, &Bits::from_u64(*istar as u64, index_bits(l))] {
                    for (i, b) in part.iter().enumerate() {
                        bits.set(off + i, b);
                    }
                    off += part.len();
                }
            }
            CompoundWitness::Raw(raw) => {
                if raw.len() != self.total() {
                    return Err(Error::Format("raw witness has the wrong length".into()));
                }
                bits = raw.clone();
            }
        }
        Ok(bits)
    }
}

fn exactly_one(b: &mut Builder, xs: &[Lit]) -> Lit {
    let (mut one, mut two) = (Lit::Const(false), Lit::Const(false));
    for &x in xs {
        let both = b.and(one, x);
        two = b.or(two, both);
        one = b.or(one, x);
    }
    let n2 = b.not(two);
    b.and(one, n2)
}

fn hamiltonian_check(b: &mut Builder, g: &Graph, p: &[Lit]) -> Lit {
    let v = g.num_vertices();
    if v < 2 {
        return Lit::Const(false);
    }
    let mut conds = Vec::new();
    for i in 0..v {
        let row: Vec<Lit> = (0..v).map(|a| p[i * v + a]).collect();
        let col: Vec<Lit> = (0..v).map(|a| p[a * v + i]).collect();
        conds.push(exactly_one(b, &row));
        conds.push(exactly_one(b, &col));
    }
    // with one-hot rows, the sums below are ORs
    for i in 0..v {
        let next = (i + 1) % v;
        let mut terms = Vec::new();
        for a in 0..v {
            let succ: Vec<Lit> = g.successors(a).map(|c| p[next * v + c]).collect();
            let reach = b.xor_many(&succ);
            terms.push(b.and(p[i * v + a], reach));
        }
        conds.push(b.xor_many(&terms));
    }
    b.and_many(&conds)
}

/// Public block masked by r when `m` is set; `m` is a literal.
fn masked_block(b: &mut Builder, pad: &[Lit], m: Lit, r: &Bits) -> Vec<Lit> {
    pad.iter()
        .zip(r.iter())
        .map(|(&p, rt)| {
            if rt {
                b.xor(p, m)
            } else {
                p
            }
        })
        .collect()
}

pub fn build_compound_circuit(st: &CompoundStatement) -> Result<BoolCircuit> {
    st.validate()?;
    let l = st.lambda;
    let v = st.graph.num_vertices();
    let w = 3 * l;
    let mut b = Builder::new();
    let p = b.inputs("cycle", v * v);
    let rstar = b.inputs("rstar", l);
    let rseeds = b.inputs("rseed", l * l);
    let istar = b.inputs("istar", index_bits(l));

    let ham = hamiltonian_check(&mut b, &st.graph, &p);

    let mut checks = Vec::new();
    // c* opens to r* under the per-bit seeds
    for j in 0..l {
        let prg = ArxGadget::new(&mut b, &rseeds[j * l..(j + 1) * l]);
        let pad = prg.stream(&mut b, w);
        let blk = masked_block(&mut b, &pad, rstar[j], st.rmsg_star.bits());
        checks.extend(b.equals_const(&blk, &st.c_star.block(j)));
    }

    // one-hot decoder of i*
    let mut dec = vec![Lit::Const(true)];
    for &bit in &istar {
        let mut next = Vec::with_capacity(dec.len() * 2);
        for &d in &dec {
            let hi = b.and(d, bit);
            next.push(b.xor(d, hi));
        }
        for &d in &dec {
            next.push(b.and(d, bit));
        }
        // index i ∈ [0, 2^k): bit k set selects the upper half
        dec = next;
    }
    let in_range: Vec<Lit> = dec.iter().take(l).copied().collect();
    checks.push(b.xor_many(&in_range));

    // c** opens to (i*, β_{i*}) under the shared seed r*
    let mut msg: Vec<Lit> = istar.clone();
    for t in 0..l {
        let sel: Vec<Lit> = (0..l).filter(|&i| st.beta(i).get(t)).map(|i| dec[i]).collect();
        msg.push(b.xor_many(&sel));
    }
    let prg = ArxGadget::new(&mut b, &rstar);
    let pad = prg.stream(&mut b, w * msg.len());
    for (j, &m) in msg.iter().enumerate() {
        let blk = masked_block(&mut b, &pad[j * w..(j + 1) * w], m, st.rmsg_2star.bits());
        checks.extend(b.equals_const(&blk, &st.c_2star.block(j)));
    }
    let trap = b.and_many(&checks);
    let out = b.or(ham, trap);
    Ok(b.finish(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::prg::Arx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn index_width() {
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(4), 2);
        assert_eq!(index_bits(5), 3);
        assert_eq!(index_bits(16), 4);
    }

    #[test]
    fn gadget_matches_native_prg() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for klen in [4usize, 16, 24, 64] {
            let mut b = Builder::new();
            let key = b.inputs("k", klen);
            let g = ArxGadget::new(&mut b, &key);
            let out = g.stream(&mut b, 70);
            let c = b.finish(out[0]);
            for _ in 0..5 {
                let kv: u64 = rng.gen::<u64>() & if klen == 64 { u64::MAX } else { (1 << klen) - 1 };
                let wires = c.eval_wires(&Bits::from_u64(kv, klen)).unwrap();
                let native = Arx::new(kv).stream(0, 70);
                for (t, lit) in out.iter().enumerate() {
                    let got = match *lit {
                        Lit::Const(x) => x,
                        Lit::Wire(w) => wires[w as usize],
                    };
                    assert_eq!(got, native.get(t), "klen {klen} bit {t}");
                }
            }
        }
    }

    #[test]
    fn decoder_and_cycle_layout() {
        let layout = InputLayout { vertices: 4, lambda: 5 };
        assert_eq!(layout.total(), 16 + 5 + 25 + 3);
        let bits = layout.encode(&CompoundWitness::Cycle(vec![0, 1, 2, 3])).unwrap();
        assert_eq!(bits.count_ones(), 4);
        assert!(layout
            .encode(&CompoundWitness::Trapdoor {
                rstar: Bits::zeros(5),
                rseeds: Bits::zeros(25),
                istar: 5
            })
            .is_err());
    }
}
