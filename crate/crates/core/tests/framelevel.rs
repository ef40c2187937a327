mod common;

use bmlrt::framelevel::{
    decode_frame_osc, encode_frame_osc, encode_standalone, generate_blinks, read_frame_stream,
    write_frame_stream, BlinkConfig, BlinkSchedule, FramePacket, FrameRecord,
};
use bmlrt::Tick;
use common::*;

#[test]
fn osc_bundles_round_trip() {
    for p in draw(frame_packet(), 3000) {
        let bytes = encode_frame_osc(&p).unwrap();
        assert_eq!(bytes.len() % 4, 0);
        assert_eq!(&bytes[..8], b"#bundle\0");
        assert_eq!(decode_frame_osc(&bytes).unwrap(), p);
        assert_eq!(encode_frame_osc(&p).unwrap(), bytes);
    }
}

#[test]
fn standalone_messages_are_big_endian_and_padded() {
    let mut p = FramePacket::at(0, Tick(0));
    p.au.insert(1, 1.0);
    let bytes = encode_standalone(&p).unwrap();
    assert_eq!(
        bytes,
        [0x2F, 0x61, 0x75, 0x2F, 0x31, 0x00, 0x00, 0x00, 0x2C, 0x66, 0x00, 0x00, 0x3F, 0x80, 0x00, 0x00]
    );
}

#[test]
fn truncated_bundles_are_rejected() {
    for p in draw(frame_packet(), 200) {
        let bytes = encode_frame_osc(&p).unwrap();
        for cut in [1, 4, 7, 13] {
            if cut < bytes.len() {
                assert!(decode_frame_osc(&bytes[..bytes.len() - cut]).is_err());
            }
        }
    }
}

#[test]
fn frame_stream_round_trips() {
    let frames = draw(frame_packet(), 100);
    let mut buf = Vec::new();
    write_frame_stream(&mut buf, &frames).unwrap();
    let back = read_frame_stream(std::str::from_utf8(&buf).unwrap()).unwrap();
    let want: Vec<FrameRecord> = frames.iter().map(FrameRecord::from).collect();
    assert_eq!(back, want);
}

#[test]
fn blink_rate_tracks_the_mean_interval() {
    for (mean, seed) in [(2.0, 1), (4.0, 2), (8.0, 3)] {
        let cfg = BlinkConfig { mean_interval_s: mean, seed, ..BlinkConfig::default() };
        let n = generate_blinks(&cfg, 3600.0).len() as f64;
        let expect = 3600.0 / mean;
        assert!((n - expect).abs() < 0.15 * expect, "mean {mean}: {n} blinks");
    }
}

#[test]
fn blink_envelope_reaches_one_and_returns_to_zero() {
    let schedule = BlinkSchedule::new(&BlinkConfig::default(), 60.0);
    for b in schedule.blinks() {
        assert_eq!(b.value_at(b.onset), 0.0);
        assert_eq!(b.value_at(b.closed), 1.0);
        assert_eq!(b.value_at(b.reopen), 1.0);
        assert_eq!(b.value_at(b.end), 0.0);
        assert!(schedule.active(b.closed).is_some());
        let mut ms = b.onset.0;
        while ms <= b.end.0 {
            let v = b.value_at(Tick(ms));
            assert!((0.0..=1.0).contains(&v));
            ms += 5;
        }
    }
}

#[test]
fn different_seeds_give_different_onsets() {
    let a = generate_blinks(&BlinkConfig { seed: 1, ..BlinkConfig::default() }, 120.0);
    let b = generate_blinks(&BlinkConfig { seed: 2, ..BlinkConfig::default() }, 120.0);
    assert_ne!(
        a.iter().map(|b| b.onset).collect::<Vec<_>>(),
        b.iter().map(|b| b.onset).collect::<Vec<_>>()
    );
}
