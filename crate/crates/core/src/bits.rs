//! Packed bit strings.
//!
//! Bit `i` lives in byte `i / 8` at position `i % 8` (little-endian bit
//! order). Bits past `len` in the last byte are always zero so that equality
//! and hashing can work on the byte buffer directly.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBits")]
pub struct Bits {
    len: usize,
    bytes: Vec<u8>,
}

/// Unchecked wire form; decoding goes through [`Bits::from_bytes`].
#[derive(Deserialize)]
struct RawBits {
    len: usize,
    bytes: Vec<u8>,
}

impl TryFrom<RawBits> for Bits {
    type Error = Error;

    fn try_from(r: RawBits) -> Result<Self> {
        Bits::from_bytes(r.bytes, r.len)
    }
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill(bytes.as_mut_slice());
        let mut b = Bits { len, bytes };
        b.clear_tail();
        b
    }

    /// The low `len` bits of `value`, least significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut b = Bits::zeros(len);
        for i in 0..len {
            if (value >> i) & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Bits::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            if v {
                b.set(i, true);
            }
        }
        b
    }

    /// Reinterprets `len` bits of a byte buffer. Fails if the buffer is too
    /// short or carries set bits past `len`.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "{} bytes cannot hold exactly {} bits",
                bytes.len(),
                len
            )));
        }
        let b = Bits { len, bytes };
        let mut check = b.clone();
        check.clear_tail();
        if check != b {
            return Err(Error::Format("set bits past the declared length".into()));
        }
        Ok(b)
    }

    /// Parses a string of '0'/'1' characters, first character is bit 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut b = Bits::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => b.set(i, true),
                _ => return Err(Error::Format(format!("not a bit character: {ch:?}"))),
            }
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.bytes[i >> 3] >> (i & 7)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let mask = 1u8 << (i & 7);
        if v {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    pub fn push(&mut self, v: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }

    pub fn extend_from(&mut self, other: &Bits) {
        let shift = self.len % 8;
        if shift == 0 {
            self.bytes.extend_from_slice(&other.bytes);
        } else {
            for &b in &other.bytes {
                *self.bytes.last_mut().expect("partial byte") |= b << shift;
                self.bytes.push(b >> (8 - shift));
            }
        }
        self.len += other.len;
        self.bytes.truncate(self.len.div_ceil(8));
    }

    pub fn concat(parts: &[&Bits]) -> Bits {
        let mut out = Bits::new();
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> Bits {
        assert!(start <= end && end <= self.len);
        let len = end - start;
        let (first, shift) = (start / 8, start % 8);
        let mut bytes: Vec<u8> = (0..len.div_ceil(8))
            .map(|i| {
                let lo = self.bytes[first + i] >> shift;
                let hi = match self.bytes.get(first + i + 1) {
                    Some(&b) if shift != 0 => b << (8 - shift),
                    _ => 0,
                };
                lo | hi
            })
            .collect();
        if len % 8 != 0 {
            *bytes.last_mut().expect("nonempty") &= (1u8 << (len % 8)) - 1;
        }
        Bits { len, bytes }
    }

    /// Bits `start..start+len` packed into an integer, bit `start` lowest.
    pub fn to_u64_range(&self, start: usize, len: usize) -> u64 {
        assert!(len <= 64 && start + len <= self.len);
        let mut v = 0u64;
        for i in 0..len {
            if self.get(start + i) {
                v |= 1 << i;
            }
        }
        v
    }

    pub fn to_u64(&self) -> u64 {
        self.to_u64_range(0, self.len)
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        Bits {
            len: self.len,
            bytes: self
                .bytes
                .iter()
                .zip(&other.bytes)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    pub fn xor_in_place(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.bytes.iter_mut().zip(&other.bytes) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_hex(&self) -> String {
        format!("{}:{}", self.len, hex::encode(&self.bytes))
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let (len, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Format("missing length prefix".into()))?;
        let len: usize = len
            .parse()
            .map_err(|_| Error::Format(format!("bad bit length {len:?}")))?;
        let bytes = hex::decode(body).map_err(|e| Error::Format(e.to_string()))?;
        Bits::from_bytes(bytes, len)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= (1u8 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(")?;
        for b in self.iter().take(96) {
            write!(f, "{}", b as u8)?;
        }
        if self.len > 96 {
            write!(f, "..[{}]", self.len)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_get_and_tail_invariant() {
        let mut b = Bits::new();
        for i in 0..19 {
            b.push(i % 3 == 0);
        }
        assert_eq!(b.len(), 19);
        assert_eq!(b.to_string(), "1001001001001001001");
        assert_eq!(b.as_bytes().len(), 3);
        let back = Bits::from_bytes(b.as_bytes().to_vec(), 19).unwrap();
        assert_eq!(back, b);
        assert!(Bits::from_bytes(vec![0xff, 0xff, 0xff], 19).is_err());
    }

    #[test]
    fn bytewise_slice_and_extend_match_bitwise() {
        let src: Vec<bool> = (0..77).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
        let b = Bits::from_bools(&src);
        for start in [0usize, 3, 8, 13, 40] {
            for end in [start, start + 1, 64, 77] {
                if end < start {
                    continue;
                }
                assert_eq!(b.slice(start, end), Bits::from_bools(&src[start..end]));
            }
        }
        for cut in [0usize, 5, 8, 31] {
            let mut head = Bits::from_bools(&src[..cut]);
            head.extend_from(&Bits::from_bools(&src[cut..]));
            assert_eq!(head, b);
        }
    }

    #[test]
    fn hex_roundtrip_and_u64() {
        let b = Bits::from_u64(0b1011, 4);
        assert_eq!(b.to_string(), "1101");
        assert_eq!(b.to_u64(), 0b1011);
        assert_eq!(Bits::from_hex(&b.to_hex()).unwrap(), b);
        assert!(Bits::from_hex("zz").is_err());
    }

    #[test]
    fn slice_concat_xor() {
        let a = Bits::parse("110010").unwrap();
        let b = Bits::parse("011011").unwrap();
        assert_eq!(a.xor(&b).to_string(), "101001");
        assert_eq!(a.slice(2, 5).to_string(), "001");
        assert_eq!(Bits::concat(&[&a, &b]).len(), 12);
    }
}
