//! OSC 1.0 encoding of frame packets.
//!
//! A frame is one bundle (`#bundle\0`, NTP timetag, size-prefixed elements)
//! with one message per populated channel:
//!
//! | address                 | arguments |
//! |-------------------------|-----------|
//! | `/agent/au/<n>`         | `f`       |
//! | `/agent/head`           | `fff`     |
//! | `/agent/gaze`           | `ff`      |
//! | `/agent/mouth/<viseme>` | `f`       |
//! | `/agent/joint/<name>`   | `f`       |
//!
//! The decoder also accepts the same addresses without the `/agent` prefix,
//! which is what [`encode_standalone`] emits for single-channel messages.

use thiserror::Error;

use super::FramePacket;
use crate::time::Tick;

pub const BUNDLE_TAG: &[u8; 8] = b"#bundle\0";
pub const ADDRESS_PREFIX: &str = "/agent";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscError {
    #[error("channel {channel}: value {value} out of range")]
    Range { channel: String, value: f32 },
    #[error("name `{0}` cannot be used in an OSC address")]
    InvalidName(String),
    #[error("byte {offset}: string padding must be NUL up to a 4-byte boundary")]
    Padding { offset: usize },
    #[error("byte {offset}: truncated, need {needed} more bytes")]
    Truncated { offset: usize, needed: usize },
    #[error("byte {offset}: bad type tag string")]
    BadTypeTag { offset: usize },
    #[error("byte {offset}: {msg}")]
    BadBundle { offset: usize, msg: String },
    #[error("unknown address `{address}`")]
    UnknownAddress { address: String },
    #[error("address `{address}` expects {expected} float arguments, got {got}")]
    Arity {
        address: String,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OscArg {
    Float(f32),
    Int(i32),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn floats(address: impl Into<String>, values: &[f32]) -> Self {
        OscMessage {
            address: address.into(),
            args: values.iter().copied().map(OscArg::Float).collect(),
        }
    }
}

fn pad4(n: usize) -> usize {
    (n + 3) & !3
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(s.as_bytes());
    out.push(0);
    while !out.len().is_multiple_of(4) {
        out.push(0);
    }
}

pub fn encode_message(msg: &OscMessage) -> Vec<u8> {
    let mut out = Vec::new();
    write_str(&mut out, &msg.address);
    let mut tags = String::from(",");
    for a in &msg.args {
        tags.push(match a {
            OscArg::Float(_) => 'f',
            OscArg::Int(_) => 'i',
            OscArg::Str(_) => 's',
        });
    }
    write_str(&mut out, &tags);
    for a in &msg.args {
        match a {
            OscArg::Float(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Int(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Str(s) => write_str(&mut out, s),
        }
    }
    out
}

/// NTP-style 32.32 fixed point from a millisecond tick.
pub fn timetag_of(tick: Tick) -> u64 {
    let ms = tick.millis().max(0) as u64;
    let secs = ms / 1000;
    let frac = (((ms % 1000) << 32) + 500) / 1000;
    (secs << 32) | frac
}

pub fn tick_of_timetag(tag: u64) -> Tick {
    let secs = tag >> 32;
    let frac = tag & 0xFFFF_FFFF;
    let ms = (frac * 1000 + (1 << 31)) >> 32;
    Tick((secs * 1000 + ms) as i64)
}

fn check_name(name: &str) -> Result<(), OscError> {
    let bad = name.is_empty()
        || name
            .chars()
            .any(|c| matches!(c, '/' | ' ' | '#' | '*' | ',' | '?' | '[' | ']' | '{' | '}' | '\0'));
    if bad {
        Err(OscError::InvalidName(name.to_string()))
    } else {
        Ok(())
    }
}

fn unit(channel: impl FnOnce() -> String, v: f32) -> Result<f32, OscError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(OscError::Range {
            channel: channel(),
            value: v,
        })
    }
}

fn finite(channel: impl FnOnce() -> String, v: f32) -> Result<f32, OscError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OscError::Range {
            channel: channel(),
            value: v,
        })
    }
}

/// Messages for every populated channel, with addresses under `prefix`.
pub fn frame_messages(p: &FramePacket, prefix: &str) -> Result<Vec<OscMessage>, OscError> {
    let mut msgs = Vec::new();
    for (&au, &v) in &p.au {
        let v = unit(|| format!("AU{au}"), v)?;
        msgs.push(OscMessage::floats(format!("{prefix}/au/{au}"), &[v]));
    }
    if let Some(head) = p.head {
        for v in head {
            finite(|| "head".into(), v)?;
        }
        msgs.push(OscMessage::floats(format!("{prefix}/head"), &head));
    }
    if let Some(gaze) = p.gaze {
        for v in gaze {
            finite(|| "gaze".into(), v)?;
        }
        msgs.push(OscMessage::floats(format!("{prefix}/gaze"), &gaze));
    }
    for (name, &v) in &p.mouth {
        check_name(name)?;
        let v = unit(|| format!("mouth/{name}"), v)?;
        msgs.push(OscMessage::floats(format!("{prefix}/mouth/{name}"), &[v]));
    }
    for (name, &v) in &p.joints {
        check_name(name)?;
        let v = finite(|| format!("joint/{name}"), v)?;
        msgs.push(OscMessage::floats(format!("{prefix}/joint/{name}"), &[v]));
    }
    Ok(msgs)
}

/// One bundle per frame, timetag from the frame's tick.
pub fn encode_frame_osc(p: &FramePacket) -> Result<Vec<u8>, OscError> {
    if p.tick < Tick::ZERO {
        return Err(OscError::Range {
            channel: "t".into(),
            value: p.t() as f32,
        });
    }
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(BUNDLE_TAG);
    out.extend_from_slice(&timetag_of(p.tick).to_be_bytes());
    for m in frame_messages(p, ADDRESS_PREFIX)? {
        let body = encode_message(&m);
        out.extend_from_slice(&(body.len() as i32).to_be_bytes());
        out.extend_from_slice(&body);
    }
    Ok(out)
}

/// Bare message (no bundle, short address) for a packet with exactly one
/// populated channel.
pub fn encode_standalone(p: &FramePacket) -> Result<Vec<u8>, OscError> {
    let msgs = frame_messages(p, "")?;
    match msgs.as_slice() {
        [m] => Ok(encode_message(m)),
        _ => Err(OscError::BadBundle {
            offset: 0,
            msg: format!("standalone mode needs exactly one channel, packet has {}", msgs.len()),
        }),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    fn need(&self, n: usize) -> Result<(), OscError> {
        if self.buf.len() - self.pos < n {
            Err(OscError::Truncated {
                offset: self.base + self.pos,
                needed: n - (self.buf.len() - self.pos),
            })
        } else {
            Ok(())
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], OscError> {
        self.need(n)?;
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn string(&mut self) -> Result<String, OscError> {
        let start = self.pos;
        let rest = &self.buf[start..];
        let nul = rest.iter().position(|&b| b == 0).ok_or(OscError::Truncated {
            offset: self.base + self.buf.len(),
            needed: 1,
        })?;
        let end = pad4(start + nul + 1);
        for i in start + nul + 1..end.min(self.buf.len()) {
            if self.buf[i] != 0 {
                return Err(OscError::Padding {
                    offset: self.base + i,
                });
            }
        }
        if end > self.buf.len() {
            return Err(OscError::Truncated {
                offset: self.base + self.buf.len(),
                needed: end - self.buf.len(),
            });
        }
        self.pos = end;
        String::from_utf8(rest[..nul].to_vec()).map_err(|_| OscError::BadTypeTag {
            offset: self.base + start,
        })
    }

    fn u32(&mut self) -> Result<u32, OscError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn decode_message(buf: &[u8]) -> Result<OscMessage, OscError> {
    decode_message_at(buf, 0)
}

fn decode_message_at(buf: &[u8], base: usize) -> Result<OscMessage, OscError> {
    let mut r = Reader { buf, pos: 0, base };
    if buf.first() != Some(&b'/') {
        return Err(OscError::BadBundle {
            offset: base,
            msg: "message address must start with `/`".into(),
        });
    }
    let address = r.string()?;
    let tag_at = r.pos;
    let tags = r.string()?;
    let Some(tags) = tags.strip_prefix(',') else {
        return Err(OscError::BadTypeTag { offset: base + tag_at });
    };
    let mut args = Vec::with_capacity(tags.len());
    for c in tags.chars() {
        args.push(match c {
            'f' => OscArg::Float(f32::from_bits(r.u32()?)),
            'i' => OscArg::Int(r.u32()? as i32),
            's' => OscArg::Str(r.string()?),
            _ => return Err(OscError::BadTypeTag { offset: base + tag_at }),
        });
    }
    if r.pos != buf.len() {
        return Err(OscError::BadBundle {
            offset: base + r.pos,
            msg: "trailing bytes after message".into(),
        });
    }
    Ok(OscMessage { address, args })
}

fn float_args(m: &OscMessage, expected: usize) -> Result<Vec<f32>, OscError> {
    let floats: Vec<f32> = m
        .args
        .iter()
        .filter_map(|a| match a {
            OscArg::Float(v) => Some(*v),
            _ => None,
        })
        .collect();
    if floats.len() != expected || m.args.len() != expected {
        return Err(OscError::Arity {
            address: m.address.clone(),
            expected,
            got: m.args.len(),
        });
    }
    Ok(floats)
}

/// Apply one channel message to a packet.
pub fn apply_message(p: &mut FramePacket, m: &OscMessage) -> Result<(), OscError> {
    let unknown = || OscError::UnknownAddress {
        address: m.address.clone(),
    };
    let path = m.address.strip_prefix(ADDRESS_PREFIX).unwrap_or(&m.address);
    let parts: Vec<&str> = path.trim_start_matches('/').split('/').collect();
    match parts.as_slice() {
        ["au", n] => {
            let au: u16 = n.parse().map_err(|_| unknown())?;
            p.au.insert(au, float_args(m, 1)?[0]);
        }
        ["head"] => {
            let v = float_args(m, 3)?;
            p.head = Some([v[0], v[1], v[2]]);
        }
        ["gaze"] => {
            let v = float_args(m, 2)?;
            p.gaze = Some([v[0], v[1]]);
        }
        ["mouth", name] if !name.is_empty() => {
            p.mouth.insert(name.to_string(), float_args(m, 1)?[0]);
        }
        ["joint", name] if !name.is_empty() => {
            p.joints.insert(name.to_string(), float_args(m, 1)?[0]);
        }
        _ => return Err(unknown()),
    }
    Ok(())
}

/// Inverse of [`encode_frame_osc`] for 25 Hz frames.
pub fn decode_frame_osc(bytes: &[u8]) -> Result<FramePacket, OscError> {
    decode_frame_osc_at(bytes, 25.0)
}

/// Decode a bundle (or a bare message); the frame index is recovered from
/// the timetag at `fps`.
pub fn decode_frame_osc_at(bytes: &[u8], fps: f64) -> Result<FramePacket, OscError> {
    let mut p = FramePacket::default();
    if !bytes.starts_with(b"#") {
        let m = decode_message(bytes)?;
        apply_message(&mut p, &m)?;
        return Ok(p);
    }
    let mut r = Reader {
        buf: bytes,
        pos: 0,
        base: 0,
    };
    if r.take(8)? != BUNDLE_TAG {
        return Err(OscError::BadBundle {
            offset: 0,
            msg: "expected `#bundle` header".into(),
        });
    }
    let hi = r.u32()? as u64;
    let lo = r.u32()? as u64;
    p.tick = tick_of_timetag((hi << 32) | lo);
    p.frame = (p.tick.secs() * fps).round() as u64;
    while r.pos < bytes.len() {
        let at = r.pos;
        let size = r.u32()? as usize;
        if !size.is_multiple_of(4) {
            return Err(OscError::BadBundle {
                offset: at,
                msg: format!("element size {size} is not a multiple of 4"),
            });
        }
        let body_at = r.pos;
        let body = r.take(size)?;
        if body.starts_with(b"#") {
            return Err(OscError::BadBundle {
                offset: body_at,
                msg: "nested bundles are not supported".into(),
            });
        }
        let m = decode_message_at(body, body_at)?;
        apply_message(&mut p, &m)?;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hand-encoded: "/au/12" + NUL + pad, ",f" + NUL + pad, 0.5f32 big-endian.
    const GOLDEN_AU12: [u8; 16] = [
        0x2F, 0x61, 0x75, 0x2F, 0x31, 0x32, 0x00, 0x00, //
        0x2C, 0x66, 0x00, 0x00, //
        0x3F, 0x00, 0x00, 0x00,
    ];

    #[test]
    fn standalone_au12_matches_golden_bytes() {
        let mut p = FramePacket::default();
        p.au.insert(12, 0.5);
        assert_eq!(encode_standalone(&p).unwrap(), GOLDEN_AU12);
    }

    #[test]
    fn golden_bytes_decode() {
        let p = decode_frame_osc(&GOLDEN_AU12).unwrap();
        assert_eq!(p.au.len(), 1);
        assert_eq!(p.au[&12], 0.5);
        assert!(p.head.is_none());
    }

    #[test]
    fn empty_packet_is_header_only_bundle() {
        let bytes = encode_frame_osc(&FramePacket::default()).unwrap();
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[..8], b"#bundle\0");
        assert_eq!(decode_frame_osc(&bytes).unwrap(), FramePacket::default());
    }

    #[test]
    fn three_byte_padding_rejected() {
        // address "/au/12" (6 bytes) + single NUL, then type tags immediately
        let mut bad = b"/au/12\0".to_vec();
        bad.extend_from_slice(b",f\0\0");
        bad.extend_from_slice(&0.5f32.to_be_bytes());
        assert!(matches!(decode_message(&bad), Err(OscError::Padding { offset: 7 })));
    }

    #[test]
    fn unknown_address_named() {
        let bytes = encode_message(&OscMessage::floats("/agent/tail", &[1.0]));
        match decode_frame_osc(&bytes) {
            Err(OscError::UnknownAddress { address }) => assert_eq!(address, "/agent/tail"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_payload() {
        let mut p = FramePacket::at(3, Tick(120));
        p.head = Some([0.1, 0.2, 0.3]);
        let bytes = encode_frame_osc(&p).unwrap();
        for cut in [4, 12, bytes.len() - 1] {
            let err = decode_frame_osc(&bytes[..cut]).unwrap_err();
            assert!(matches!(err, OscError::Truncated { .. }), "cut {cut}: {err:?}");
        }
    }

    #[test]
    fn out_of_range_refused() {
        let mut p = FramePacket::default();
        p.au.insert(4, 1.2);
        assert!(matches!(encode_frame_osc(&p), Err(OscError::Range { .. })));
        let p = FramePacket {
            head: Some([f32::NAN, 0.0, 0.0]),
            ..Default::default()
        };
        assert!(matches!(encode_frame_osc(&p), Err(OscError::Range { .. })));
        let mut p = FramePacket::default();
        p.mouth.insert("a/b".into(), 0.2);
        assert!(matches!(encode_frame_osc(&p), Err(OscError::InvalidName(_))));
    }

    #[test]
    fn timetags_round_trip_every_millisecond() {
        for ms in 0..5000 {
            assert_eq!(tick_of_timetag(timetag_of(Tick(ms))), Tick(ms));
        }
        assert_eq!(timetag_of(Tick(1000)), 1u64 << 32);
    }

    #[test]
    fn full_packet_round_trip() {
        let mut p = FramePacket::at(7, Tick(280));
        p.au.insert(1, 0.25);
        p.au.insert(45, 1.0);
        p.head = Some([-0.1, 0.2, 0.0]);
        p.gaze = Some([0.05, -0.05]);
        p.mouth.insert("open".into(), 0.8);
        p.joints.insert("r_shoulder.x".into(), -1.5);
        let bytes = encode_frame_osc(&p).unwrap();
        assert_eq!(bytes.len() % 4, 0);
        assert_eq!(decode_frame_osc(&bytes).unwrap(), p);
    }

    #[test]
    fn wrong_arity_rejected() {
        let bytes = encode_message(&OscMessage::floats("/agent/head", &[1.0]));
        assert!(matches!(decode_frame_osc(&bytes), Err(OscError::Arity { expected: 3, .. })));
    }
}
