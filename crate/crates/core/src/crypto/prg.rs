//! Toy keyed ARX permutation on 32-bit blocks, used in counter mode as the
//! PRG behind every commitment. Heuristic only: it stands in for a
//! post-quantum one-way function that desk scale cannot afford.
//!
//! The key schedule is linear over GF(2) in the key bits so that the
//! Boolean-circuit version pays only for the modular additions.

use crate::bits::Bits;

pub const ROUNDS: usize = 8;
pub const ALPHA: u32 = 7;
pub const BETA: u32 = 2;

pub const ROUND_CONSTANTS: [u16; ROUNDS] = [
    0x243f, 0x6a88, 0x85a3, 0x08d3, 0x1319, 0x8a2e, 0x0370, 0x7344,
];

/// Counter block j enters as x = j_lo ^ IV_X, y = j_hi ^ IV_Y.
pub const IV_X: u16 = 0x9e37;
pub const IV_Y: u16 = 0x79b9;

/// Rotation applied to key word w (index 0..4) in round r.
pub fn key_rotation(word: usize, r: usize) -> u32 {
    match word {
        0 => r as u32 % 16,
        1 => (r as u32 + 5) % 16,
        2 => (2 * r as u32 + 1) % 16,
        _ => (3 * r as u32 + 7) % 16,
    }
}

pub fn round_keys(key: u64) -> [u16; ROUNDS] {
    let w = [
        key as u16,
        (key >> 16) as u16,
        (key >> 32) as u16,
        (key >> 48) as u16,
    ];
    let mut k = [0u16; ROUNDS];
    for (r, kr) in k.iter_mut().enumerate() {
        *kr = ROUND_CONSTANTS[r];
        for (i, wi) in w.iter().enumerate() {
            *kr ^= wi.rotate_left(key_rotation(i, r));
        }
    }
    k
}

#[derive(Debug, Clone)]
pub struct Arx {
    keys: [u16; ROUNDS],
}

impl Arx {
    pub fn new(key: u64) -> Self {
        Arx {
            keys: round_keys(key),
        }
    }

    #[inline]
    pub fn encrypt(&self, x: u16, y: u16) -> (u16, u16) {
        let (mut x, mut y) = (x, y);
        for &k in &self.keys {
            x = x.rotate_right(ALPHA).wrapping_add(y) ^ k;
            y = y.rotate_left(BETA) ^ x;
        }
        (x, y)
    }

    /// Counter block `j` as a word with x in the low half.
    #[inline]
    pub fn block(&self, j: u32) -> u32 {
        let (x, y) = self.encrypt(j as u16 ^ IV_X, (j >> 16) as u16 ^ IV_Y);
        x as u32 | (y as u32) << 16
    }

    /// `len` output bits starting at block `start`.
    pub fn stream(&self, start: u32, len: usize) -> Bits {
        let blocks = len.div_ceil(32);
        let mut bytes = Vec::with_capacity(blocks * 4);
        for j in 0..blocks {
            bytes.extend_from_slice(&self.block(start + j as u32).to_le_bytes());
        }
        bytes.truncate(len.div_ceil(8));
        let rem = len % 8;
        if rem != 0 {
            *bytes.last_mut().expect("nonempty") &= (1u8 << rem) - 1;
        }
        Bits::from_bytes(bytes, len).expect("tail cleared")
    }
}

/// G(seed, out_len). The seed is at most 64 bits.
pub fn prg_expand(seed: &Bits, out_len: usize) -> Bits {
    assert!(seed.len() <= 64, "seed longer than the 64-bit key");
    assert!(out_len <= 1 << 20, "output length above 2^20");
    Arx::new(seed.to_u64()).stream(0, out_len)
}

pub fn prg_expand_u64(seed: u64, out_len: usize) -> Bits {
    Arx::new(seed).stream(0, out_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_is_linear_in_the_key() {
        let z = round_keys(0);
        for a in [1u64, 0x8000, 0x1234_5678_9abc_def0] {
            for b in [3u64, 0xffff_0000, 0x0f0f_0f0f_0f0f_0f0f] {
                let (ka, kb, kab) = (round_keys(a), round_keys(b), round_keys(a ^ b));
                for r in 0..ROUNDS {
                    assert_eq!(kab[r], ka[r] ^ kb[r] ^ z[r]);
                }
            }
        }
    }

    #[test]
    fn permutation_is_injective_on_a_sample() {
        let e = Arx::new(42);
        let mut seen = std::collections::HashSet::new();
        for v in 0..50_000u32 {
            assert!(seen.insert(e.encrypt(v as u16, (v >> 16) as u16)));
        }
    }

    #[test]
    fn length_contract_and_prefix_consistency() {
        let s = Bits::from_u64(0xab, 8);
        assert_eq!(prg_expand(&s, 24).len(), 24);
        let long = prg_expand(&s, 100);
        assert_eq!(long.slice(0, 24), prg_expand(&s, 24));
        assert_eq!(prg_expand(&s, 0).len(), 0);
    }
}
