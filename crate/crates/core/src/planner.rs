//! Behavior planning: FML intentions to BML signals.

use std::collections::BTreeMap;

use crate::lexicon::{resolve_intention, sample_behavior_set, LexiconError, Libraries};
use crate::markup::{
    BmlDocument, FmlDocument, Modality, Signal, SpeechToken, SyncPoint, SPEECH_END, SPEECH_START,
};
use crate::time::Tick;

/// Speech-rate settings for the timing estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeechRate {
    /// Seconds per word.
    pub word_s: f64,
}

impl Default for SpeechRate {
    fn default() -> Self {
        SpeechRate { word_s: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordTiming {
    pub index: usize,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeechTiming {
    pub marker_times: BTreeMap<String, f64>,
    pub word_times: Vec<WordTiming>,
    pub utterance_duration_s: f64,
}

/// Uniform-rate stand-in for a TTS engine: word `k` spans
/// `[k * w, (k + 1) * w)` and each marker sits at the start of the next word.
pub fn estimate_speech_timing(doc: &FmlDocument, rate: SpeechRate) -> SpeechTiming {
    let word = Tick::from_secs(rate.word_s).millis();
    let mut marker_times = BTreeMap::new();
    let mut word_times = Vec::new();
    let mut pending = Vec::new();

    for token in &doc.speech {
        match token {
            SpeechToken::Marker(id) => pending.push(id.clone()),
            SpeechToken::Word(_) => {
                let k = word_times.len() as i64;
                let start = Tick(k * word);
                for id in pending.drain(..) {
                    marker_times.insert(id, start.secs());
                }
                word_times.push(WordTiming {
                    index: k as usize,
                    start_s: start.secs(),
                    end_s: Tick((k + 1) * word).secs(),
                });
            }
        }
    }
    let duration = Tick(word_times.len() as i64 * word).secs();
    for id in pending {
        marker_times.insert(id, duration);
    }
    marker_times.insert(SPEECH_START.to_string(), 0.0);
    marker_times.insert(SPEECH_END.to_string(), duration);
    SpeechTiming {
        marker_times,
        word_times,
        utterance_duration_s: duration,
    }
}

/// Integer priority from an importance in `[0, 1]`.
pub fn priority_of(importance: f64) -> i64 {
    (importance * 10.0).round() as i64
}

/// Translate intentions into signals.
///
/// Faces lead the intention by their attack and trail it by their decay.
/// Body behaviors put the stroke on the intention onset, preparation before
/// it and retraction after the intention ends. One speech signal covers the
/// utterance; its lexeme is the spoken text.
pub fn plan_behaviors(
    doc: &FmlDocument,
    libs: &Libraries,
    timing: &SpeechTiming,
    seed: u64,
) -> Result<BmlDocument, LexiconError> {
    let duration = Tick::from_secs(timing.utterance_duration_s);
    let text = doc.words().collect::<Vec<_>>().join(" ");
    let mut signals = vec![Signal::new(
        "speech",
        Modality::Speech,
        text,
        0.0,
        duration.secs(),
    )];
    let mut ids: std::collections::HashSet<String> = ["speech".to_string()].into();

    for (n, intention) in doc.intentions.iter().enumerate() {
        let alternatives = resolve_intention(libs, intention)?;
        let chosen = sample_behavior_set(alternatives, seed.wrapping_add(n as u64));
        let at = |id: &str| Tick::from_secs(timing.marker_times.get(id).copied().unwrap_or(0.0));
        let onset = at(&intention.start_ref);
        let offset = at(&intention.end_ref).max(onset);
        let priority = priority_of(intention.importance);

        for behavior in chosen {
            let base = format!("{}:{}:{}", intention.id, behavior.modality, behavior.name);
            // Intention ids need not be unique; signal ids must be.
            let id = (1..)
                .map(|k| if k == 1 { base.clone() } else { format!("{base}#{k}") })
                .find(|id| ids.insert(id.clone()))
                .unwrap();
            let signal = match behavior.modality {
                Modality::Face => {
                    let face = &libs.faces[&behavior.name];
                    let start = (onset - Tick::from_secs(face.attack_s)).max(Tick::ZERO);
                    let end = offset + Tick::from_secs(face.decay_s);
                    Signal::new(id, Modality::Face, &behavior.name, start.secs(), end.secs())
                }
                modality => {
                    let gesture = &libs.gestuary[&behavior.name];
                    let start = (onset - Tick::from_secs(gesture.preparation_s)).max(Tick::ZERO);
                    let end = offset + Tick::from_secs(gesture.retraction_s);
                    Signal::new(id, modality, &behavior.name, start.secs(), end.secs())
                        .with_sync(SyncPoint::Stroke, onset.secs())
                }
            };
            signals.push(signal.with_priority(priority));
        }
    }

    Ok(BmlDocument {
        signals,
        utterance_duration_s: duration.secs(),
    })
}
