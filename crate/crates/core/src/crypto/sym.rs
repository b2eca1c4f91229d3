//! Symmetric encryption and a keyed tag over the ARX permutation.
//!
//! The tag is a MAC standing in for a signature: only the party that
//! created the key ever verifies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::commit::check_lambda;
use super::prg::Arx;
use crate::bits::Bits;
use crate::error::{Error, Result};

const TAG_DOMAIN: u64 = 1 << 63;
const KEY_MAGIC: &[u8; 4] = b"KEY1";

/// A λ-bit secret; serves as both the encryption key and the tag key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawKey")]
pub struct SecretKey {
    key: Bits,
}

#[derive(Deserialize)]
struct RawKey {
    key: Bits,
}

impl TryFrom<RawKey> for SecretKey {
    type Error = Error;

    fn try_from(k: RawKey) -> Result<Self> {
        SecretKey::from_bits(k.key)
    }
}

pub type SymKey = SecretKey;
pub type TagKey = SecretKey;

impl SecretKey {
    pub fn generate<R: Rng + ?Sized>(lambda: usize, rng: &mut R) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(SecretKey {
            key: Bits::random(lambda, rng),
        })
    }

    pub fn from_bits(key: Bits) -> Result<Self> {
        check_lambda(key.len())?;
        Ok(SecretKey { key })
    }

    pub fn lambda(&self) -> usize {
        self.key.len()
    }

    pub fn bits(&self) -> &Bits {
        &self.key
    }

    fn word(&self) -> u64 {
        self.key.to_u64()
    }

    pub fn to_key1(&self) -> Vec<u8> {
        let mut out = KEY_MAGIC.to_vec();
        out.extend_from_slice(&(self.lambda() as u16).to_le_bytes());
        out.extend_from_slice(self.key.as_bytes());
        out
    }

    pub fn from_key1(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 || &bytes[..4] != KEY_MAGIC {
            return Err(Error::Format("missing KEY1 header".into()));
        }
        let lambda = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
        SecretKey::from_bits(Bits::from_bytes(bytes[6..].to_vec(), lambda)?)
    }
}

fn nonce_bytes(lambda: usize) -> usize {
    lambda.div_ceil(8)
}

fn keystream(k: &SecretKey, nonce: u64, len: usize) -> Vec<u8> {
    Arx::new(k.word() | nonce << 32)
        .stream(0, 8 * len)
        .as_bytes()
        .to_vec()
}

/// Counter-mode encryption under a fresh λ-bit nonce, which is prepended.
pub fn enc<R: Rng + ?Sized>(k: &SymKey, m: &[u8], rng: &mut R) -> Vec<u8> {
    let nonce = Bits::random(k.lambda(), rng);
    let ks = keystream(k, nonce.to_u64(), m.len());
    let mut out = nonce.as_bytes().to_vec();
    out.extend(m.iter().zip(&ks).map(|(a, b)| a ^ b));
    out
}

pub fn dec(k: &SymKey, ct: &[u8]) -> Result<Vec<u8>> {
    let nb = nonce_bytes(k.lambda());
    if ct.len() < nb {
        return Err(Error::Format(format!(
            "ciphertext of {} bytes is shorter than its {nb}-byte nonce",
            ct.len()
        )));
    }
    let nonce = Bits::from_bytes(ct[..nb].to_vec(), k.lambda())?;
    let body = &ct[nb..];
    let ks = keystream(k, nonce.to_u64(), body.len());
    Ok(body.iter().zip(&ks).map(|(a, b)| a ^ b).collect())
}

fn chain(e: &Arx, h: u32, input: u32) -> u32 {
    let v = h ^ input;
    let (x, y) = e.encrypt(v as u16, (v >> 16) as u16);
    x as u32 | (y as u32) << 16
}

/// Length-prefixed CBC-MAC, expanded to 2λ bits.
pub fn tag(k: &TagKey, m: &[u8]) -> Bits {
    let e = Arx::new(k.word() | TAG_DOMAIN);
    let mut h = chain(&e, 0, m.len() as u32);
    for ch in m.chunks(4) {
        let mut w = [0u8; 4];
        w[..ch.len()].copy_from_slice(ch);
        h = chain(&e, h, u32::from_le_bytes(w));
    }
    let out_len = 2 * k.lambda();
    let mut out = Bits::new();
    let mut j = 0u32;
    while out.len() < out_len {
        let w = chain(&e, h, 0x8000_0000 | j);
        for t in 0..32 {
            if out.len() == out_len {
                break;
            }
            out.push((w >> t) & 1 == 1);
        }
        j += 1;
    }
    out
}

pub fn tag_verify(k: &TagKey, m: &[u8], t: &Bits) -> bool {
    tag(k, m) == *t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enc_roundtrip_and_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let k = SecretKey::generate(16, &mut rng).unwrap();
        for len in [0usize, 1, 3, 17, 200] {
            let m: Vec<u8> = (0..len).map(|i| (i * 7) as u8).collect();
            let ct = enc(&k, &m, &mut rng);
            assert_eq!(ct.len(), 2 + len);
            assert_eq!(dec(&k, &ct).unwrap(), m);
        }
        assert!(dec(&k, &[1]).is_err());
    }

    #[test]
    fn tag_roundtrip_and_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = SecretKey::generate(16, &mut rng).unwrap();
        let m = b"ciphertext bytes".to_vec();
        let t = tag(&k, &m);
        assert_eq!(t.len(), 32);
        assert!(tag_verify(&k, &m, &t));
        let mut m2 = m.clone();
        m2[3] ^= 1;
        assert!(!tag_verify(&k, &m2, &t));
        // length prefix separates zero-padded messages
        assert_ne!(tag(&k, b"ab"), tag(&k, b"ab\0"));
    }

    #[test]
    fn key1_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let k = SecretKey::generate(12, &mut rng).unwrap();
        assert_eq!(SecretKey::from_key1(&k.to_key1()).unwrap(), k);
        assert!(SecretKey::from_key1(b"KEY2\x0c\x00\x00\x00").is_err());
    }
}
