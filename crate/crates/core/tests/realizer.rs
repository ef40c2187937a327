mod common;

use bmlrt::lexicon::load_libraries;
use bmlrt::markup::{Modality, Signal};
use bmlrt::realizer::{resolve_conflicts, sample_frames, ChannelId, Track};
use bmlrt::realizer::interp::MonotoneCubic;
use bmlrt::{Tick, Timeline, Timeline32};
use common::*;
use proptest::prelude::*;

const MODALITIES: [Modality; 6] = [
    Modality::Gesture,
    Modality::Head,
    Modality::Gaze,
    Modality::Torso,
    Modality::Face,
    Modality::Speech,
];

fn mixed_signals() -> impl Strategy<Value = Vec<(Modality, f64, f64, i64)>> {
    prop::collection::vec(
        (0usize..6, 0u8..=6, 0u8..=6, 0i64..3).prop_map(|(m, a, b, p)| {
            let (a, b) = (a.min(b), a.max(b));
            (MODALITIES[m], a as f64 * 0.5, b as f64 * 0.5, p)
        }),
        0..9,
    )
}

#[test]
fn mixed_modalities_resolve_independently() {
    for set in draw(mixed_signals(), 2000) {
        let signals: Vec<Signal> = set
            .iter()
            .enumerate()
            .map(|(i, (m, s, e, p))| Signal::new(format!("s{i}"), *m, "x", *s, *e).with_priority(*p))
            .collect();
        let out = resolve_conflicts(&signals);
        for m in MODALITIES {
            let input: Vec<(String, f64, f64, i64)> = signals
                .iter()
                .filter(|s| s.modality == m && s.start() < s.end())
                .map(|s| (s.id.clone(), s.start(), s.end(), s.priority))
                .collect();
            let got: Vec<&Signal> = out.iter().filter(|s| s.modality == m).collect();
            if !m.is_exclusive() {
                let before: Vec<&Signal> = signals.iter().filter(|s| s.modality == m).collect();
                assert_eq!(got, before, "{m} must pass through");
                continue;
            }
            let resolved: Vec<(String, f64, f64)> = got
                .iter()
                .filter(|s| s.start() < s.end())
                .map(|s| (s.id.clone(), s.start(), s.end()))
                .collect();
            let (owner, _) = occupancy_oracle(&input);
            assert_eq!(occupancy_of(&resolved).unwrap(), owner, "{m}: {input:?} -> {resolved:?}");
        }
    }
}

#[test]
fn surviving_signals_keep_sync_points_inside_their_span() {
    for set in draw(mixed_signals(), 500) {
        let signals: Vec<Signal> = set
            .iter()
            .enumerate()
            .map(|(i, (m, s, e, p))| {
                let mid = (s + e) / 2.0;
                Signal::new(format!("s{i}"), *m, "x", *s, *e)
                    .with_sync(bmlrt::markup::SyncPoint::Stroke, mid)
                    .with_priority(*p)
            })
            .collect();
        for s in resolve_conflicts(&signals) {
            s.validate().unwrap();
            for t in s.sync.values() {
                assert!(s.start() <= *t && *t <= s.end(), "{s:?}");
            }
        }
    }
}

#[test]
fn interpolant_is_exact_and_bounded() {
    for k in draw(knots(10, 3000), 300) {
        let track = Track::new("k", ChannelId::GazeX, k.clone());
        for &(t, v) in &k {
            assert_eq!(track.value_at(t), v);
        }
        assert_eq!(track.value_at(Tick(-5)), k[0].1);
        assert_eq!(track.value_at(Tick(5000)), k[k.len() - 1].1);
        for w in k.windows(2) {
            let (lo, hi) = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
            let step = ((w[1].0 .0 - w[0].0 .0) / 50).max(1);
            let mut ms = w[0].0 .0;
            while ms <= w[1].0 .0 {
                let v = track.value_at(Tick(ms));
                assert!(lo <= v && v <= hi, "{v} outside [{lo}, {hi}] at {ms}");
                ms += step;
            }
        }
    }
}

#[test]
fn monotone_data_gives_monotone_curve_in_both_precisions() {
    let xs = vec![0.0, 0.1, 0.5, 0.6, 2.0];
    let ys = vec![0.0, 0.0, 0.9, 0.95, 1.0];
    let c64 = MonotoneCubic::new(xs.clone(), ys.clone());
    let c32 = MonotoneCubic::<f32>::new(
        xs.iter().map(|x| *x as f32).collect(),
        ys.iter().map(|y| *y as f32).collect(),
    );
    let (mut p64, mut p32) = (f64::MIN, f32::MIN);
    for i in 0..=2000 {
        let x = i as f64 / 1000.0;
        let (a, b) = (c64.eval(x), c32.eval(x as f32));
        assert!(a >= p64 && b >= p32, "dip at {x}");
        assert!((a - b as f64).abs() < 1e-5);
        (p64, p32) = (a, b);
    }
}

#[test]
fn sample_lexicon_realizes_identically_in_f32_and_f64() {
    let libs = load_libraries(data("lib")).unwrap();
    let fml = std::fs::read_to_string(data("anger.fml.xml")).unwrap();
    let bml = bmlrt::pipeline::compile_fml(&fml, &libs, Default::default(), 3).unwrap();
    let wide: Timeline = bmlrt::pipeline::realize(&bml, &libs, 25.0).unwrap();
    let narrow: Timeline32 = bmlrt::pipeline::realize(&bml, &libs, 25.0).unwrap();
    let a = sample_frames(&wide);
    let b = sample_frames(&narrow);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.tick, y.tick);
        for ((kx, vx), (ky, vy)) in x.channel_map().iter().zip(y.channel_map().iter()) {
            assert_eq!(kx, ky);
            assert!((vx - vy).abs() < 1e-5, "{kx}: {vx} vs {vy}");
        }
    }
}
