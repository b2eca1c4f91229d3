//! QST1 dumps: magic, u32 qubit count, then little-endian f64 (re, im)
//! pairs for every amplitude.

use super::matrix::C64;
use super::state::QState;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QST1";

pub fn dump_qst1(state: &QState) -> Result<Vec<u8>> {
    let amps = state
        .amplitudes()
        .ok_or_else(|| Error::Format("QST1 holds pure states only".into()))?;
    let mut out = Vec::with_capacity(8 + 16 * amps.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(state.num_qubits() as u32).to_le_bytes());
    for a in amps {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    Ok(out)
}

pub fn load_qst1(bytes: &[u8]) -> Result<QState> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing QST1 header".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    if n > 24 {
        return Err(Error::Format(format!("{n} qubits is too many to load")));
    }
    let body = &bytes[8..];
    if body.len() != 16 << n {
        return Err(Error::Format(format!(
            "{} payload bytes for {n} qubits",
            body.len()
        )));
    }
    let amps = body
        .chunks_exact(16)
        .map(|ch| {
            C64::new(
                f64::from_le_bytes(ch[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(ch[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    QState::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rejects() {
        let s = QState::normalized(vec![C64::new(1.0, 0.5), C64::new(0.0, -2.0)]).unwrap();
        let b = dump_qst1(&s).unwrap();
        assert_eq!(b.len(), 8 + 32);
        assert_eq!(load_qst1(&b).unwrap(), s);
        assert!(load_qst1(&b[..20]).is_err());
        assert!(load_qst1(b"QSTX\0\0\0\0").is_err());
        assert!(dump_qst1(&s.to_mixed()).is_err());
    }
}
