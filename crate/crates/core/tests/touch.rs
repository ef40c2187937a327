mod common;

use bmlrt::markup::{BmlDocument, Modality, Signal};
use bmlrt::touch::{
    attention_score, classify_proxemics, classify_touch, gate_touch, read_touch_csv, GazeTarget,
    ProxemicsThresholds, ProxemicsZone, TouchClass,
};
use common::*;

fn planned() -> BmlDocument {
    BmlDocument {
        signals: vec![
            Signal::new("g1", Modality::Gesture, "touch:tap_shoulder", 0.2, 0.9),
            Signal::new("f1", Modality::Face, "smile", 0.0, 1.0),
            Signal::new("g2", Modality::Gesture, "beat", 1.0, 1.4),
        ],
        utterance_duration_s: 1.5,
    }
}

#[test]
fn classifier_matches_the_rule_table() {
    for f in draw(touch_sample(), 5000) {
        assert_eq!(
            classify_touch(&f),
            touch_oracle(f.dynamic, f.intensity_mps, f.speed_mps, f.duration_s),
            "{f:?}"
        );
    }
}

#[test]
fn sample_csv_classifies() {
    let file = std::fs::File::open(data("touch.csv")).unwrap();
    let rows = read_touch_csv(file).unwrap();
    assert!(!rows.is_empty());
    let classes: Vec<TouchClass> = rows.iter().map(classify_touch).collect();
    assert!(classes.contains(&TouchClass::Caress));
}

#[test]
fn bad_csv_rows_name_their_record() {
    let text = "has_movement,intensity_mps,body_region,dynamic,speed_mps,duration_s,pressure\n\
                true,0.2,arm,true,0.1,1.0,\n\
                true,-1,arm,true,0.1,1.0,\n";
    let err = read_touch_csv(text.as_bytes()).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

#[test]
fn zones_split_at_the_thresholds() {
    use ProxemicsZone::*;
    for (d, z) in [(0.0, Intimate), (0.449, Intimate), (0.45, Personal), (1.2, Social), (3.6, Public), (50.0, Public)] {
        assert_eq!(classify_proxemics(d).unwrap(), z, "{d} m");
    }
    assert!(classify_proxemics(-0.1).is_err());
    assert!(classify_proxemics(f64::NAN).is_err());
    assert!(ProxemicsThresholds::new([1.0, 0.5, 2.0]).is_err());
}

#[test]
fn gating_keeps_only_what_is_allowed_and_is_idempotent() {
    let doc = planned();
    for zone in [ProxemicsZone::Intimate, ProxemicsZone::Personal, ProxemicsZone::Social, ProxemicsZone::Public] {
        for gaze in GazeTarget::ALL {
            let a = attention_score(gaze);
            let once = gate_touch(&doc, zone, a);
            assert_eq!(gate_touch(&once, zone, a), once);
            let kept_touch = once.signals.iter().any(|s| s.lexeme.starts_with("touch:"));
            assert_eq!(kept_touch, zone.allows_touch() && a >= 0.5, "{zone:?} {gaze:?}");
            let others = |d: &BmlDocument| d.signals.iter().filter(|s| !s.lexeme.starts_with("touch:")).cloned().collect::<Vec<_>>();
            assert_eq!(others(&once), others(&doc));
            assert_eq!(once.utterance_duration_s, doc.utterance_duration_s);
        }
    }
}
