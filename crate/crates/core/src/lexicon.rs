//! Behavior libraries and the intention lexicon.
//!
//! A library directory holds three line-oriented files (`docs/lexicon.md`
//! has the grammar):
//!
//! ```text
//! # faces.lex
//! face frown attack=0.2 sustain=0.1 decay=0.3 au4=0.8 au7=0.3
//!
//! # gestuary.lex
//! gesture ample_arm preparation=0.4 retraction=0.5
//!   preparation 0 r_shoulder=0,0,0
//!   preparation 1 r_shoulder=0.6,0.2,0
//!   stroke 0 r_shoulder=0.6,0.2,0
//!   stroke 1 r_shoulder=1.0,0.4,0
//!   retraction 0 r_shoulder=1.0,0.4,0
//!   retraction 1 r_shoulder=0,0,0
//!
//! # lexicon.lex
//! entry emotion anger
//!   alt 1.0 face:frown gesture:ample_arm
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::markup::{Intention, IntentionClass, Modality};
use crate::rng::SplitMix64;

pub const GESTUARY_FILE: &str = "gestuary.lex";
pub const FACES_FILE: &str = "faces.lex";
pub const LEXICON_FILE: &str = "lexicon.lex";

const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("missing library file {path}: {source}")]
    MissingFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}:{line}: {msg}")]
    Syntax {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("lexicon entry ({class}, {lexeme}) references {modality} behavior `{behavior}` which is not in the library")]
    DanglingReference {
        class: IntentionClass,
        lexeme: String,
        modality: Modality,
        behavior: String,
    },
    #[error("lexicon entry ({class}, {lexeme}): alternative probabilities sum to {sum}, expected 1")]
    ProbabilitySum {
        class: IntentionClass,
        lexeme: String,
        sum: f64,
    },
    #[error("no lexicon entry for intention ({class}, {lexeme})")]
    UnknownIntention {
        class: IntentionClass,
        lexeme: String,
    },
}

/// Facial expression with an attack / sustain / decay envelope per AU.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceLibEntry {
    pub name: String,
    /// AU number to peak intensity in `[0, 1]`.
    pub aus: BTreeMap<u16, f64>,
    pub attack_s: f64,
    pub sustain_min_s: f64,
    pub decay_s: f64,
}

/// One pose in a gesture phase; `t` is phase-local in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseKey {
    pub t: f64,
    /// Joint name to (x, y, z) rotation in radians.
    pub pose: BTreeMap<String, [f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GesturePhase {
    Preparation,
    Stroke,
    Retraction,
}

impl GesturePhase {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "preparation" => Some(Self::Preparation),
            "stroke" => Some(Self::Stroke),
            "retraction" => Some(Self::Retraction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestuaryEntry {
    pub name: String,
    pub preparation: Vec<PhaseKey>,
    pub stroke: Vec<PhaseKey>,
    pub retraction: Vec<PhaseKey>,
    /// Lead-in before the stroke, used by the planner.
    pub preparation_s: f64,
    /// Tail after the intention ends, used by the planner.
    pub retraction_s: f64,
}

impl GestuaryEntry {
    pub fn phase(&self, phase: GesturePhase) -> &[PhaseKey] {
        match phase {
            GesturePhase::Preparation => &self.preparation,
            GesturePhase::Stroke => &self.stroke,
            GesturePhase::Retraction => &self.retraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Behavior {
    pub modality: Modality,
    pub name: String,
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.modality, self.name)
    }
}

pub type BehaviorSet = BTreeSet<Behavior>;

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub class: IntentionClass,
    pub lexeme: String,
    /// In file order.
    pub alternatives: Vec<(BehaviorSet, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Libraries {
    pub gestuary: BTreeMap<String, GestuaryEntry>,
    pub faces: BTreeMap<String, FaceLibEntry>,
    pub lexicon: BTreeMap<(IntentionClass, String), LexiconEntry>,
}

impl Libraries {
    /// Builds and validates libraries from the three file contents.
    pub fn from_sources(gestuary: &str, faces: &str, lexicon: &str) -> Result<Self, LexiconError> {
        let libs = Libraries {
            gestuary: parse_gestuary(gestuary)?,
            faces: parse_faces(faces)?,
            lexicon: parse_lexicon(lexicon)?,
        };
        libs.validate()?;
        Ok(libs)
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        if let Some(e) = self.dangling_references().into_iter().next() {
            return Err(e);
        }
        for entry in self.lexicon.values() {
            let sum: f64 = entry.alternatives.iter().map(|(_, p)| p).sum();
            let positive = entry.alternatives.iter().all(|(_, p)| *p > 0.0);
            if !positive || (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(LexiconError::ProbabilitySum {
                    class: entry.class,
                    lexeme: entry.lexeme.clone(),
                    sum,
                });
            }
        }
        Ok(())
    }

    /// Every behavior reference that does not resolve, in lexicon order.
    pub fn dangling_references(&self) -> Vec<LexiconError> {
        let mut out = Vec::new();
        for entry in self.lexicon.values() {
            for (set, _) in &entry.alternatives {
                for b in set {
                    if !self.has_behavior(b) {
                        out.push(LexiconError::DanglingReference {
                            class: entry.class,
                            lexeme: entry.lexeme.clone(),
                            modality: b.modality,
                            behavior: b.name.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn has_behavior(&self, b: &Behavior) -> bool {
        match b.modality {
            Modality::Face => self.faces.contains_key(&b.name),
            Modality::Speech => false,
            _ => self.gestuary.contains_key(&b.name),
        }
    }

    /// Longest tail any behavior can add after its intention ends.
    pub fn max_decay(&self) -> f64 {
        let faces = self.faces.values().map(|f| f.decay_s);
        let gestures = self.gestuary.values().map(|g| g.retraction_s);
        faces.chain(gestures).fold(0.0, f64::max)
    }

    pub fn entry_count(&self) -> usize {
        self.gestuary.len() + self.faces.len() + self.lexicon.len()
    }
}

/// Load `gestuary.lex`, `faces.lex` and `lexicon.lex` from `dir`.
pub fn load_libraries(dir: impl AsRef<Path>) -> Result<Libraries, LexiconError> {
    let dir = dir.as_ref();
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|source| LexiconError::MissingFile { path, source })
    };
    Libraries::from_sources(&read(GESTUARY_FILE)?, &read(FACES_FILE)?, &read(LEXICON_FILE)?)
}

/// Alternatives for an intention, in file order.
pub fn resolve_intention<'a>(
    libs: &'a Libraries,
    intention: &Intention,
) -> Result<&'a [(BehaviorSet, f64)], LexiconError> {
    libs.lexicon
        .get(&(intention.class, intention.lexeme.clone()))
        .map(|e| e.alternatives.as_slice())
        .ok_or_else(|| LexiconError::UnknownIntention {
            class: intention.class,
            lexeme: intention.lexeme.clone(),
        })
}

/// Pick one alternative by inverting the cumulative distribution at the
/// first uniform draw of the SplitMix64 stream keyed by `seed`.
pub fn sample_behavior_set(alternatives: &[(BehaviorSet, f64)], seed: u64) -> &BehaviorSet {
    assert!(!alternatives.is_empty(), "no alternatives to sample from");
    let u = SplitMix64::new(seed).next_f64();
    let mut cumulative = 0.0;
    for (set, p) in alternatives {
        cumulative += p;
        if u < cumulative {
            return set;
        }
    }
    &alternatives[alternatives.len() - 1].0
}

// ---------------------------------------------------------------------------
// Record syntax

struct Line<'a> {
    no: usize,
    words: Vec<&'a str>,
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        (!words.is_empty()).then_some(Line { no: i + 1, words })
    })
}

fn syntax(file: &str, line: usize, msg: impl Into<String>) -> LexiconError {
    LexiconError::Syntax {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

fn number(file: &str, line: usize, raw: &str) -> Result<f64, LexiconError> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(file, line, format!("`{raw}` is not a finite number"))),
    }
}

fn key_value<'a>(file: &str, line: usize, word: &'a str) -> Result<(&'a str, &'a str), LexiconError> {
    word.split_once('=')
        .ok_or_else(|| syntax(file, line, format!("expected key=value, found `{word}`")))
}

fn parse_faces(text: &str) -> Result<BTreeMap<String, FaceLibEntry>, LexiconError> {
    const F: &str = FACES_FILE;
    let mut out = BTreeMap::new();
    for line in lines(text) {
        let n = line.no;
        if line.words[0] != "face" || line.words.len() < 2 {
            return Err(syntax(F, n, "expected `face <name> key=value...`"));
        }
        let mut entry = FaceLibEntry {
            name: line.words[1].to_string(),
            aus: BTreeMap::new(),
            attack_s: 0.0,
            sustain_min_s: 0.0,
            decay_s: 0.0,
        };
        let mut seen = BTreeSet::new();
        for word in &line.words[2..] {
            let (k, v) = key_value(F, n, word)?;
            let v = number(F, n, v)?;
            match k {
                "attack" => entry.attack_s = v,
                "sustain" => entry.sustain_min_s = v,
                "decay" => entry.decay_s = v,
                au if au.starts_with("au") => {
                    let id: u16 = au[2..]
                        .parse()
                        .map_err(|_| syntax(F, n, format!("bad action unit `{au}`")))?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(syntax(F, n, format!("{au} intensity {v} outside [0, 1]")));
                    }
                    entry.aus.insert(id, v);
                }
                other => return Err(syntax(F, n, format!("unknown key `{other}`"))),
            }
            if !seen.insert(k) {
                return Err(syntax(F, n, format!("key `{k}` given twice")));
            }
        }
        for (key, v) in [
            ("attack", entry.attack_s),
            ("sustain", entry.sustain_min_s),
            ("decay", entry.decay_s),
        ] {
            if v <= 0.0 {
                return Err(syntax(F, n, format!("`{key}` must be given and > 0")));
            }
        }
        if out.insert(entry.name.clone(), entry).is_some() {
            return Err(syntax(F, n, format!("face `{}` defined twice", line.words[1])));
        }
    }
    Ok(out)
}

fn parse_pose(file: &str, line: usize, words: &[&str]) -> Result<BTreeMap<String, [f64; 3]>, LexiconError> {
    let mut pose = BTreeMap::new();
    for word in words {
        let (joint, triple) = key_value(file, line, word)?;
        let parts: Vec<&str> = triple.split(',').collect();
        if parts.len() != 3 {
            return Err(syntax(file, line, format!("joint `{joint}` needs x,y,z")));
        }
        let mut rot = [0.0; 3];
        for (slot, p) in rot.iter_mut().zip(parts) {
            *slot = number(file, line, p)?;
        }
        if pose.insert(joint.to_string(), rot).is_some() {
            return Err(syntax(file, line, format!("joint `{joint}` given twice")));
        }
    }
    Ok(pose)
}

fn check_phase(name: &str, phase: &str, keys: &[PhaseKey], required: bool) -> Result<(), String> {
    if keys.is_empty() {
        return if required {
            Err(format!("gesture `{name}` has an empty {phase} phase"))
        } else {
            Ok(())
        };
    }
    let first = keys[0].t;
    let last = keys[keys.len() - 1].t;
    let increasing = keys.windows(2).all(|w| w[0].t < w[1].t);
    if first != 0.0 || last != 1.0 || !increasing {
        return Err(format!(
            "gesture `{name}` {phase} phase times must rise strictly from 0 to 1"
        ));
    }
    Ok(())
}

fn parse_gestuary(text: &str) -> Result<BTreeMap<String, GestuaryEntry>, LexiconError> {
    const F: &str = GESTUARY_FILE;
    let mut out: BTreeMap<String, GestuaryEntry> = BTreeMap::new();
    let mut current: Option<(GestuaryEntry, usize)> = None;

    let finish = |entry: GestuaryEntry,
                  line: usize,
                  out: &mut BTreeMap<String, GestuaryEntry>|
     -> Result<(), LexiconError> {
        check_phase(&entry.name, "preparation", &entry.preparation, false)
            .and_then(|_| check_phase(&entry.name, "stroke", &entry.stroke, true))
            .and_then(|_| check_phase(&entry.name, "retraction", &entry.retraction, false))
            .map_err(|m| syntax(F, line, m))?;
        let name = entry.name.clone();
        if out.insert(name.clone(), entry).is_some() {
            return Err(syntax(F, line, format!("gesture `{name}` defined twice")));
        }
        Ok(())
    };

    for line in lines(text) {
        let n = line.no;
        match line.words[0] {
            "gesture" => {
                if let Some((done, at)) = current.take() {
                    finish(done, at, &mut out)?;
                }
                let name = line
                    .words
                    .get(1)
                    .ok_or_else(|| syntax(F, n, "gesture needs a name"))?;
                let mut entry = GestuaryEntry {
                    name: name.to_string(),
                    preparation: vec![],
                    stroke: vec![],
                    retraction: vec![],
                    preparation_s: 0.4,
                    retraction_s: 0.4,
                };
                for word in &line.words[2..] {
                    let (k, v) = key_value(F, n, word)?;
                    let v = number(F, n, v)?;
                    if v <= 0.0 {
                        return Err(syntax(F, n, format!("`{k}` must be > 0")));
                    }
                    match k {
                        "preparation" => entry.preparation_s = v,
                        "retraction" => entry.retraction_s = v,
                        other => return Err(syntax(F, n, format!("unknown key `{other}`"))),
                    }
                }
                current = Some((entry, n));
            }
            word => {
                let phase = GesturePhase::parse(word)
                    .ok_or_else(|| syntax(F, n, format!("unknown record `{word}`")))?;
                let (entry, _) = current
                    .as_mut()
                    .ok_or_else(|| syntax(F, n, "phase line before any `gesture` header"))?;
                let t = number(
                    F,
                    n,
                    line.words
                        .get(1)
                        .ok_or_else(|| syntax(F, n, "phase line needs a time"))?,
                )?;
                let pose = parse_pose(F, n, &line.words[2..])?;
                let key = PhaseKey { t, pose };
                match phase {
                    GesturePhase::Preparation => entry.preparation.push(key),
                    GesturePhase::Stroke => entry.stroke.push(key),
                    GesturePhase::Retraction => entry.retraction.push(key),
                }
            }
        }
    }
    if let Some((done, at)) = current.take() {
        finish(done, at, &mut out)?;
    }
    Ok(out)
}

fn parse_lexicon(
    text: &str,
) -> Result<BTreeMap<(IntentionClass, String), LexiconEntry>, LexiconError> {
    const F: &str = LEXICON_FILE;
    let mut out: BTreeMap<(IntentionClass, String), LexiconEntry> = BTreeMap::new();
    let mut current: Option<(IntentionClass, String)> = None;
    for line in lines(text) {
        let n = line.no;
        match line.words[0] {
            "entry" => {
                if line.words.len() != 3 {
                    return Err(syntax(F, n, "expected `entry <class> <lexeme>`"));
                }
                let class = line.words[1]
                    .parse::<IntentionClass>()
                    .map_err(|_| syntax(F, n, format!("unknown class `{}`", line.words[1])))?;
                let key = (class, line.words[2].to_string());
                if out.contains_key(&key) {
                    return Err(syntax(F, n, format!("entry ({}, {}) defined twice", key.0, key.1)));
                }
                out.insert(
                    key.clone(),
                    LexiconEntry {
                        class,
                        lexeme: key.1.clone(),
                        alternatives: vec![],
                    },
                );
                current = Some(key);
            }
            "alt" => {
                let key = current
                    .as_ref()
                    .ok_or_else(|| syntax(F, n, "`alt` before any `entry`"))?;
                let p = number(
                    F,
                    n,
                    line.words
                        .get(1)
                        .ok_or_else(|| syntax(F, n, "`alt` needs a probability"))?,
                )?;
                let mut set = BehaviorSet::new();
                for word in &line.words[2..] {
                    let (m, name) = word.split_once(':').ok_or_else(|| {
                        syntax(F, n, format!("expected modality:behavior, found `{word}`"))
                    })?;
                    let modality = m
                        .parse::<Modality>()
                        .ok()
                        .filter(|m| *m != Modality::Speech)
                        .ok_or_else(|| syntax(F, n, format!("unusable modality `{m}`")))?;
                    set.insert(Behavior {
                        modality,
                        name: name.to_string(),
                    });
                }
                if set.is_empty() {
                    return Err(syntax(F, n, "`alt` lists no behaviors"));
                }
                out.get_mut(key).expect("current entry exists").alternatives.push((set, p));
            }
            other => return Err(syntax(F, n, format!("unknown record `{other}`"))),
        }
    }
    for entry in out.values() {
        if entry.alternatives.is_empty() {
            return Err(LexiconError::ProbabilitySum {
                class: entry.class,
                lexeme: entry.lexeme.clone(),
                sum: 0.0,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GESTUARY: &str = "\
gesture ample_arm preparation=0.4 retraction=0.5
  preparation 0 r_shoulder=0,0,0
  preparation 1 r_shoulder=0.6,0.2,0
  stroke 0 r_shoulder=0.6,0.2,0
  stroke 1 r_shoulder=1.0,0.4,0
  retraction 0 r_shoulder=1.0,0.4,0
  retraction 1 r_shoulder=0,0,0
gesture nod
  stroke 0 head=0,0,0
  stroke 1 head=0.2,0,0
";
    const FACES: &str = "face frown attack=0.2 sustain=0.1 decay=0.3 au4=0.8\n\
face smile attack=0.3 sustain=0.2 decay=0.4 au6=0.5 au12=0.9\n";
    const LEXICON: &str = "\
entry emotion anger
  alt 1.0 face:frown gesture:ample_arm
entry emotion joy
  alt 0.7 face:smile
  alt 0.3 face:smile head:nod
";

    fn libs() -> Libraries {
        Libraries::from_sources(GESTUARY, FACES, LEXICON).unwrap()
    }

    fn intention(class: IntentionClass, lexeme: &str) -> Intention {
        Intention {
            id: "i1".into(),
            class,
            lexeme: lexeme.into(),
            start_ref: "speech-start".into(),
            end_ref: "speech-end".into(),
            importance: 0.5,
        }
    }

    #[test]
    fn empty_sources_give_empty_libraries() {
        let libs = Libraries::from_sources("", "", "# nothing here\n").unwrap();
        assert_eq!(libs.entry_count(), 0);
    }

    #[test]
    fn anger_resolves_to_frown_and_ample_arm() {
        let libs = libs();
        let alts = resolve_intention(&libs, &intention(IntentionClass::Emotion, "anger")).unwrap();
        assert_eq!(alts.len(), 1);
        let names: Vec<String> = alts[0].0.iter().map(ToString::to_string).collect();
        assert_eq!(names, ["face:frown", "gesture:ample_arm"]);
        assert_eq!(alts[0].1, 1.0);
    }

    #[test]
    fn alternatives_keep_file_order() {
        let libs = libs();
        let alts = resolve_intention(&libs, &intention(IntentionClass::Emotion, "joy")).unwrap();
        let probs: Vec<f64> = alts.iter().map(|(_, p)| *p).collect();
        assert_eq!(probs, [0.7, 0.3]);
        assert_eq!(alts[1].0.len(), 2);
    }

    #[test]
    fn unknown_intention_carries_key() {
        let err = resolve_intention(&libs(), &intention(IntentionClass::Performative, "greet"))
            .unwrap_err();
        assert!(matches!(
            err,
            LexiconError::UnknownIntention { class: IntentionClass::Performative, ref lexeme } if lexeme == "greet"
        ));
    }

    #[test]
    fn dangling_gesture_reference() {
        let err = Libraries::from_sources(GESTUARY, FACES, "entry performative greet\n alt 1 gesture:wave\n")
            .unwrap_err();
        match err {
            LexiconError::DanglingReference { behavior, modality, .. } => {
                assert_eq!(behavior, "wave");
                assert_eq!(modality, Modality::Gesture);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn probability_sum_violation() {
        let err = Libraries::from_sources(
            GESTUARY,
            FACES,
            "entry emotion joy\n alt 0.6 face:smile\n alt 0.3 face:frown\n",
        )
        .unwrap_err();
        assert!(matches!(err, LexiconError::ProbabilitySum { .. }));
        // within 1e-9 is accepted
        Libraries::from_sources(
            GESTUARY,
            FACES,
            "entry emotion joy\n alt 0.1 face:smile\n alt 0.2 face:frown\n alt 0.7 head:nod\n",
        )
        .unwrap();
    }

    #[test]
    fn malformed_records_report_line() {
        let err = Libraries::from_sources("gesture g\n  stroke 0 a=1,2\n", "", "").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { line: 2, .. }));
        let err = Libraries::from_sources("gesture g\n  stroke 0 a=0,0,0\n", "", "").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { .. }), "single-key stroke must span 0..1");
        let err = Libraries::from_sources("", "face f attack=0.1 sustain=0.1 decay=0.1 au4=1.5\n", "")
            .unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { line: 1, .. }));
        let err = Libraries::from_sources("", "face f attack=0.1 decay=0.1\n", "").unwrap_err();
        assert!(matches!(err, LexiconError::Syntax { .. }));
    }

    #[test]
    fn missing_directory_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(GESTUARY_FILE), "").unwrap();
        assert!(matches!(
            load_libraries(dir.path()),
            Err(LexiconError::MissingFile { .. })
        ));
        std::fs::write(dir.path().join(FACES_FILE), "").unwrap();
        std::fs::write(dir.path().join(LEXICON_FILE), "").unwrap();
        assert_eq!(load_libraries(dir.path()).unwrap().entry_count(), 0);
    }

    #[test]
    fn single_alternative_always_chosen() {
        let libs = libs();
        let alts = resolve_intention(&libs, &intention(IntentionClass::Emotion, "anger")).unwrap();
        for seed in 0..100 {
            assert_eq!(sample_behavior_set(alts, seed), &alts[0].0);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_matches_distribution() {
        let libs = libs();
        let alts = resolve_intention(&libs, &intention(IntentionClass::Emotion, "joy")).unwrap();
        assert_eq!(sample_behavior_set(alts, 1234), sample_behavior_set(alts, 1234));
        // Oracle: replay the documented stream directly.
        let mut first = 0;
        for seed in 0..10_000u64 {
            let u = SplitMix64::new(seed).next_f64();
            let expect_first = u < 0.7;
            let got_first = sample_behavior_set(alts, seed) == &alts[0].0;
            assert_eq!(expect_first, got_first, "seed {seed}");
            first += got_first as usize;
        }
        let freq = first as f64 / 10_000.0;
        assert!((0.68..=0.72).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn max_decay_spans_faces_and_gestures() {
        assert_eq!(libs().max_decay(), 0.5);
    }
}
