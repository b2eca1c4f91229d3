//! Wire framing: a 4-byte big-endian length, then a UTF-8 JSON object
//! {session_id, round, dir, type, payload_hex}. The payload is bincode.

use std::io::{Read, Write};

use bincode::Options;
use serde::{Deserialize, Serialize};

use super::msg::{Dir, Payload, ProtocolMsg};
use crate::error::{Error, Result};

/// Largest accepted frame body.
pub const MAX_FRAME: usize = 64 << 20;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFrame {
    session_id: u64,
    round: u32,
    dir: Dir,
    #[serde(rename = "type")]
    kind: String,
    payload_hex: String,
}

fn payload_options() -> impl Options {
    bincode::DefaultOptions::new().with_limit(MAX_FRAME as u64 / 2)
}

pub fn encode_payload(p: &Payload) -> Result<Vec<u8>> {
    payload_options()
        .serialize(p)
        .map_err(|e| Error::Format(format!("payload encoding: {e}")))
}

pub fn decode_payload(bytes: &[u8]) -> Result<Payload> {
    payload_options()
        .deserialize(bytes)
        .map_err(|e| Error::Format(format!("payload decoding: {e}")))
}

/// Frame body (without the length prefix).
pub fn encode_body(m: &ProtocolMsg) -> Result<Vec<u8>> {
    let frame = WireFrame {
        session_id: m.session_id,
        round: m.round,
        dir: m.dir,
        kind: m.payload.type_name().to_string(),
        payload_hex: hex::encode(encode_payload(&m.payload)?),
    };
    serde_json::to_vec(&frame).map_err(|e| Error::Format(e.to_string()))
}

pub fn decode_body(body: &[u8]) -> Result<ProtocolMsg> {
    let frame: WireFrame =
        serde_json::from_slice(body).map_err(|e| Error::Frame(format!("frame object: {e}")))?;
    let bytes = hex::decode(&frame.payload_hex).map_err(|e| Error::Frame(format!("payload hex: {e}")))?;
    let payload = decode_payload(&bytes)?;
    if payload.type_name() != frame.kind {
        return Err(Error::Frame(format!(
            "type {:?} does not match a {} payload",
            frame.kind,
            payload.type_name()
        )));
    }
    if let Some(r) = payload.expected_round() {
        if r != frame.round {
            return Err(Error::Frame(format!("{} payload in round {}", frame.kind, frame.round)));
        }
    }
    if frame.dir != Dir::of_round(frame.round) && !payload.is_terminal() {
        return Err(Error::Frame(format!("round {} sent in the wrong direction", frame.round)));
    }
    Ok(ProtocolMsg {
        session_id: frame.session_id,
        round: frame.round,
        dir: frame.dir,
        payload,
    })
}

/// Length-prefixed frame.
pub fn encode_msg(m: &ProtocolMsg) -> Result<Vec<u8>> {
    let body = encode_body(m)?;
    if body.len() > MAX_FRAME {
        return Err(Error::Frame(format!("frame of {} bytes", body.len())));
    }
    let mut out = (body.len() as u32).to_be_bytes().to_vec();
    out.extend_from_slice(&body);
    Ok(out)
}

/// Decodes exactly one frame occupying all of `bytes`.
pub fn decode_msg(bytes: &[u8]) -> Result<ProtocolMsg> {
    if bytes.len() < 4 {
        return Err(Error::Frame("truncated length prefix".into()));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    if len > MAX_FRAME {
        return Err(Error::Frame(format!("declared length {len} above limit")));
    }
    if bytes.len() - 4 != len {
        return Err(Error::Frame(format!(
            "declared length {len}, {} bytes present",
            bytes.len() - 4
        )));
    }
    decode_body(&bytes[4..])
}

pub fn write_frame<W: Write>(w: &mut W, m: &ProtocolMsg) -> Result<()> {
    w.write_all(&encode_msg(m)?)?;
    w.flush()?;
    Ok(())
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<ProtocolMsg> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(Error::Frame(format!("declared length {len} above limit")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    decode_body(&body)
}
