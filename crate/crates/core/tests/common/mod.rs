//! Generators and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use bmlrt::framelevel::FramePacket;
use bmlrt::markup::{BmlDocument, FmlDocument, Intention, IntentionClass, Modality, Signal, SpeechToken, SyncPoint};
use bmlrt::realizer::{ChannelId, KeyframeTimeline, Track};
use bmlrt::touch::{BodyRegion, TouchClass, TouchFeatures};
use bmlrt::Tick;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Seeded runner so every run sees the same cases.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Draw `n` values from a strategy with the seeded runner.
pub fn draw<S: Strategy>(strategy: S, n: u32) -> Vec<S::Value> {
    let mut runner = runner(n);
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

// ---------------------------------------------------------------- markup

fn word() -> impl Strategy<Value = String> {
    "[A-Za-z0-9'&<>\".,!?-]{1,8}"
}

fn attr_text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_:&<>'\" .-]{1,12}"
}

pub fn fml_document() -> impl Strategy<Value = FmlDocument> {
    (prop::collection::vec(prop::option::weighted(0.25, word()), 0..20)).prop_flat_map(|slots| {
        let mut speech = Vec::new();
        let mut markers = Vec::new();
        for (i, s) in slots.into_iter().enumerate() {
            match s {
                Some(w) => speech.push(SpeechToken::Word(w)),
                None => {
                    let id = format!("tm{i}");
                    markers.push(id.clone());
                    speech.push(SpeechToken::Marker(id));
                }
            }
        }
        let mut refs = vec!["speech-start".to_string()];
        refs.extend(markers);
        refs.push("speech-end".to_string());
        let n = refs.len();
        let intention = (
            0..n,
            0..n,
            prop::sample::select(IntentionClass::ALL.to_vec()),
            attr_text(),
            prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64],
        );
        (Just(speech), Just(refs), prop::collection::vec(intention, 0..5))
    })
    .prop_map(|(speech, refs, raw)| {
        let intentions = raw
            .into_iter()
            .enumerate()
            .map(|(k, (a, b, class, lexeme, importance))| Intention {
                id: format!("i{k}"),
                class,
                lexeme,
                start_ref: refs[a.min(b)].clone(),
                end_ref: refs[a.max(b)].clone(),
                importance,
            })
            .collect();
        FmlDocument { speech, intentions }
    })
}

fn signal(index: usize) -> impl Strategy<Value = Signal> {
    (
        prop::sample::select(Modality::ALL.to_vec()),
        attr_text(),
        prop::collection::vec(0.0..10.0f64, 2..=7),
        prop::collection::btree_set(1..6usize, 0..=5),
        -3i64..12,
    )
        .prop_map(move |(modality, lexeme, mut times, inner, priority)| {
            times.sort_by(f64::total_cmp);
            let mut sync = BTreeMap::new();
            sync.insert(SyncPoint::Start, times[0]);
            sync.insert(SyncPoint::End, times[times.len() - 1]);
            // Inner points take the middle times in canonical order.
            let inner: Vec<_> = inner.into_iter().map(|i| SyncPoint::ALL[i]).collect();
            for (p, t) in inner.iter().zip(&times[1..times.len() - 1]) {
                sync.insert(*p, *t);
            }
            let mut s = Signal::new(format!("s{index}"), modality, lexeme, 0.0, 0.0);
            s.sync = sync;
            s.priority = priority;
            s
        })
}

pub fn bml_document() -> impl Strategy<Value = BmlDocument> {
    (0..6usize)
        .prop_flat_map(|n| {
            let sigs: Vec<_> = (0..n).map(signal).collect();
            (sigs, 0.0..10.0f64)
        })
        .prop_map(|(signals, duration)| BmlDocument {
            signals,
            utterance_duration_s: duration,
        })
}

// ---------------------------------------------------------------- timelines

pub fn channel() -> impl Strategy<Value = ChannelId> {
    prop_oneof![
        (1u16..46).prop_map(ChannelId::Au),
        Just(ChannelId::HeadX),
        Just(ChannelId::GazeY),
        "[a-z]{1,4}\\.[xyz]".prop_map(ChannelId::Joint),
        Just(ChannelId::Viseme("open".into())),
    ]
}

/// Strictly increasing ticks with values in [-1, 1].
pub fn knots(max_len: usize, horizon_ms: i64) -> impl Strategy<Value = Vec<(Tick, f64)>> {
    prop::collection::btree_set(0..=horizon_ms, 1..=max_len).prop_flat_map(|ticks| {
        let n = ticks.len();
        (Just(ticks), prop::collection::vec(-1.0..=1.0f64, n))
    })
    .prop_map(|(ticks, values)| ticks.into_iter().map(Tick).zip(values).collect())
}

pub fn timeline() -> impl Strategy<Value = KeyframeTimeline<f64>> {
    (prop::collection::vec((channel(), knots(8, 4000)), 0..6), 0..=4500i64).prop_map(|(tracks, dur)| {
        let tracks = tracks
            .into_iter()
            .enumerate()
            .map(|(i, (ch, k))| Track::new(format!("t{i}"), ch, k))
            .collect();
        KeyframeTimeline::new(tracks, Tick(dur))
    })
}

// ---------------------------------------------------------------- frames

pub fn frame_packet() -> impl Strategy<Value = FramePacket> {
    let unit = 0.0..=1.0f32;
    let angle = -3.2..3.2f32;
    (
        0u64..1_000_000,
        prop::collection::btree_map(0u16..100, unit.clone(), 0..6),
        prop::option::of([angle.clone(), angle.clone(), angle.clone()]),
        prop::option::of([angle.clone(), angle.clone()]),
        prop::collection::btree_map("[a-z]{1,6}", unit, 0..3),
        prop::collection::btree_map("[a-z_]{1,8}\\.[xyz]", angle, 0..3),
    )
        .prop_map(|(frame, au, head, gaze, mouth, joints)| {
            let mut p = FramePacket::at(frame, Tick::of_frame(frame, 25.0));
            p.au = au;
            p.head = head;
            p.gaze = gaze;
            p.mouth = mouth;
            p.joints = joints;
            p
        })
}

// ---------------------------------------------------------------- oracles

/// Grid cells of width 0.5 s on [0, 3): cell j is [0.5j, 0.5j + 0.5).
pub const CELLS: usize = 6;

fn cells_of(start: f64, end: f64) -> Vec<usize> {
    (0..CELLS)
        .filter(|j| {
            let mid = 0.25 + 0.5 * *j as f64;
            start <= mid && mid < end
        })
        .collect()
}

/// Expected occupancy for one exclusive modality, by sampling each grid cell
/// at its midpoint. Signals claim cells strongest first (priority, then
/// later start, then larger id); each keeps the first run of consecutive
/// cells still free inside its span, or nothing.
pub fn occupancy_oracle(signals: &[(String, f64, f64, i64)]) -> (BTreeMap<usize, String>, BTreeSet<String>) {
    let mut order: Vec<&(String, f64, f64, i64)> = signals.iter().collect();
    order.sort_by(|a, b| {
        b.3.cmp(&a.3)
            .then(b.1.total_cmp(&a.1))
            .then(b.0.cmp(&a.0))
    });
    let mut owner: BTreeMap<usize, String> = BTreeMap::new();
    let mut survivors = BTreeSet::new();
    for (id, start, end, _) in order {
        let mut run: Vec<usize> = Vec::new();
        for j in cells_of(*start, *end) {
            if owner.contains_key(&j) {
                if !run.is_empty() {
                    break;
                }
            } else if run.last().is_none_or(|l| *l + 1 == j) {
                run.push(j);
            } else {
                break;
            }
        }
        if !run.is_empty() {
            survivors.insert(id.clone());
            for j in run {
                owner.insert(j, id.clone());
            }
        }
    }
    (owner, survivors)
}

/// Occupancy of already-resolved signals, same sampling.
pub fn occupancy_of(signals: &[(String, f64, f64)]) -> Result<BTreeMap<usize, String>, String> {
    let mut owner = BTreeMap::new();
    for (id, start, end) in signals {
        for j in cells_of(*start, *end) {
            if let Some(other) = owner.insert(j, id.clone()) {
                return Err(format!("cell {j} held by both {other} and {id}"));
            }
        }
    }
    Ok(owner)
}

/// Touch rule table written out case by case.
pub fn touch_oracle(dynamic: bool, intensity: f64, speed: f64, duration: f64) -> TouchClass {
    match (dynamic, duration < 0.3, intensity >= 0.8, speed < 0.15) {
        (true, _, _, true) => TouchClass::Caress,
        (true, _, _, false) => TouchClass::Stroke,
        (false, true, true, _) => TouchClass::Hit,
        (false, true, false, _) => TouchClass::Tap,
        (false, false, _, _) => TouchClass::Tap,
    }
}

pub fn touch_sample() -> impl Strategy<Value = TouchFeatures> {
    let magnitude = prop_oneof![Just(0.0), Just(0.15), Just(0.3), Just(0.8), 0.0..3.0f64];
    (
        any::<bool>(),
        magnitude.clone(),
        prop::sample::select(vec![BodyRegion::Hand, BodyRegion::Arm, BodyRegion::Shoulder, BodyRegion::Back, BodyRegion::Other]),
        magnitude.clone(),
        magnitude,
        prop::option::of(0.0..1.0f64),
    )
        .prop_map(|(dynamic, intensity, region, speed, duration, pressure)| TouchFeatures {
            has_movement: dynamic,
            intensity_mps: intensity,
            body_region: region,
            dynamic,
            speed_mps: if dynamic { speed } else { 0.0 },
            duration_s: duration,
            pressure,
        })
}
