use std::path::PathBuf;

use bmlrt::lexicon::load_libraries;
use bmlrt::markup::{parse_bml, serialize_bml, Modality, SyncPoint};
use bmlrt::pipeline::{compile_fml, realize, PipelineError};
use bmlrt::planner::SpeechRate;
use bmlrt::realizer::{sample_frames, ChannelId};
use bmlrt::Timeline;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

#[test]
fn sample_libraries_load_and_validate() {
    let libs = load_libraries(data("lib")).unwrap();
    libs.validate().unwrap();
    assert!(libs.gestuary.contains_key("touch:tap_shoulder"));
    assert_eq!(libs.faces["frown"].aus[&4], 0.8);
}

#[test]
fn anger_compiles_and_realizes() {
    let libs = load_libraries(data("lib")).unwrap();
    let bml = compile_fml(&read("anger.fml.xml"), &libs, SpeechRate::default(), 0).unwrap();
    let face = bml.signals.iter().find(|s| s.modality == Modality::Face).unwrap();
    let arm = bml.signals.iter().find(|s| s.modality == Modality::Gesture).unwrap();
    assert_eq!(face.lexeme, "frown");
    assert_eq!(arm.lexeme, "ample_arm");
    // "I told you" precedes tm1: three words at 0.4 s.
    assert_eq!(arm.get(SyncPoint::Stroke), Some(1.2));

    let text = serialize_bml(&bml);
    assert_eq!(parse_bml(&text).unwrap(), bml);

    let tl: Timeline = realize(&bml, &libs, 25.0).unwrap();
    assert!(tl.channels().contains(&ChannelId::Au(4)));
    assert!(tl.channels().contains(&ChannelId::Joint("r_shoulder.x".into())));
    let frames = sample_frames(&tl);
    assert_eq!(frames.len() as u64, tl.frame_count());
    assert!(frames.iter().any(|f| f.au.get(&4).copied().unwrap_or(0.0) > 0.79));
}

#[test]
fn dangling_marker_is_reported_with_position() {
    let libs = load_libraries(data("lib")).unwrap();
    let err = compile_fml(&read("dangling.fml.xml"), &libs, SpeechRate::default(), 0).unwrap_err();
    match err {
        PipelineError::Markup(e) => {
            assert!(e.to_string().contains("tm9"), "{e}");
            assert_eq!(e.pos().line, 3);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn empty_bml_realizes_to_one_frame() {
    let libs = load_libraries(data("lib")).unwrap();
    let bml = parse_bml(&read("empty.bml.xml")).unwrap();
    let tl: Timeline = realize(&bml, &libs, 25.0).unwrap();
    assert_eq!(sample_frames(&tl).len(), 1);
}
