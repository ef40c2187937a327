//! Behavior realization: BML signals to per-channel keyframe timelines.
//!
//! Each signal becomes one [`Track`] per channel it drives. Face tracks on
//! the same AU compose by maximum when sampled; body channels are exclusive
//! and resolved by [`resolve_conflicts`] before tracks are built.

mod conflict;
pub mod interp;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use conflict::{rank, resolve_conflicts};

use crate::framelevel::FramePacket;
use crate::lexicon::{GestuaryEntry, GesturePhase, Libraries};
use crate::markup::{BmlDocument, Modality, Signal, SyncPoint};
use crate::scalar::Scalar;
use crate::time::Tick;
use interp::{hermite_eval, monotone_tangents};

pub const DEFAULT_FPS: f64 = 25.0;
/// Peak mouth opening per word for the placeholder viseme track.
pub const VISEME_PEAK: f64 = 0.8;
pub const OPEN_VISEME: &str = "open";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelId {
    Au(u16),
    HeadX,
    HeadY,
    HeadZ,
    GazeX,
    GazeY,
    /// `<joint>.<axis>`, e.g. `r_shoulder.x`.
    Joint(String),
    Viseme(String),
}

impl ChannelId {
    /// AU and viseme channels hold intensities in `[0, 1]` and compose by max.
    pub fn is_intensity(&self) -> bool {
        matches!(self, ChannelId::Au(_) | ChannelId::Viseme(_))
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelId::Au(n) => write!(f, "AU{n}"),
            ChannelId::HeadX => f.write_str("HEAD_X"),
            ChannelId::HeadY => f.write_str("HEAD_Y"),
            ChannelId::HeadZ => f.write_str("HEAD_Z"),
            ChannelId::GazeX => f.write_str("GAZE_X"),
            ChannelId::GazeY => f.write_str("GAZE_Y"),
            ChannelId::Joint(j) => write!(f, "JOINT:{j}"),
            ChannelId::Viseme(v) => write!(f, "VISEME:{v}"),
        }
    }
}

impl FromStr for ChannelId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "HEAD_X" => ChannelId::HeadX,
            "HEAD_Y" => ChannelId::HeadY,
            "HEAD_Z" => ChannelId::HeadZ,
            "GAZE_X" => ChannelId::GazeX,
            "GAZE_Y" => ChannelId::GazeY,
            _ => {
                if let Some(n) = s.strip_prefix("AU") {
                    ChannelId::Au(n.parse().map_err(|_| format!("bad AU channel `{s}`"))?)
                } else if let Some(j) = s.strip_prefix("JOINT:") {
                    ChannelId::Joint(j.to_string())
                } else if let Some(v) = s.strip_prefix("VISEME:") {
                    ChannelId::Viseme(v.to_string())
                } else {
                    return Err(format!("unknown channel `{s}`"));
                }
            }
        })
    }
}

/// A keyframe as seen from the whole timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe<S> {
    pub t: Tick,
    pub channel: ChannelId,
    pub value: S,
    /// Index of the owning track.
    pub track: usize,
}

/// Keyframes of one channel contributed by one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Track<S: Scalar> {
    pub signal: String,
    pub channel: ChannelId,
    knots: Vec<(Tick, S)>,
    xs: Vec<S>,
    ys: Vec<S>,
    slopes: Vec<S>,
}

impl<S: Scalar> Track<S> {
    /// `knots` must be non-empty with strictly increasing ticks.
    pub fn new(signal: impl Into<String>, channel: ChannelId, knots: Vec<(Tick, S)>) -> Self {
        assert!(!knots.is_empty(), "track without knots");
        assert!(
            knots.windows(2).all(|w| w[0].0 < w[1].0),
            "knot ticks must strictly increase"
        );
        let xs: Vec<S> = knots.iter().map(|(t, _)| S::of(t.secs())).collect();
        let ys: Vec<S> = knots.iter().map(|(_, v)| *v).collect();
        let slopes = monotone_tangents(&xs, &ys);
        Track {
            signal: signal.into(),
            channel,
            knots,
            xs,
            ys,
            slopes,
        }
    }

    pub fn knots(&self) -> &[(Tick, S)] {
        &self.knots
    }

    pub fn first(&self) -> Tick {
        self.knots[0].0
    }

    pub fn last(&self) -> Tick {
        self.knots[self.knots.len() - 1].0
    }

    pub fn covers(&self, t: Tick) -> bool {
        self.first() <= t && t <= self.last()
    }

    /// Interpolated value; exact at knots. Only meaningful while `covers(t)`.
    pub fn value_at(&self, t: Tick) -> S {
        if let Ok(i) = self.knots.binary_search_by(|(k, _)| k.cmp(&t)) {
            return self.knots[i].1;
        }
        hermite_eval(&self.xs, &self.ys, &self.slopes, S::of(t.secs()))
    }

    /// Evaluate at a time in seconds.
    pub fn value_at_secs(&self, t: S) -> S {
        if let Some(&(_, v)) = self.knots.iter().find(|(k, _)| S::of(k.secs()) == t) {
            return v;
        }
        hermite_eval(&self.xs, &self.ys, &self.slopes, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyframeTimeline<S: Scalar> {
    pub tracks: Vec<Track<S>>,
    pub duration: Tick,
    pub fps: f64,
}

impl<S: Scalar> Default for KeyframeTimeline<S> {
    fn default() -> Self {
        KeyframeTimeline {
            tracks: Vec::new(),
            duration: Tick::ZERO,
            fps: DEFAULT_FPS,
        }
    }
}

impl<S: Scalar> KeyframeTimeline<S> {
    pub fn new(tracks: Vec<Track<S>>, duration: Tick) -> Self {
        let latest = tracks.iter().map(Track::last).max().unwrap_or(Tick::ZERO);
        KeyframeTimeline {
            tracks,
            duration: duration.max(latest),
            fps: DEFAULT_FPS,
        }
    }

    pub fn with_fps(mut self, fps: f64) -> Self {
        assert!(fps > 0.0, "fps must be positive");
        self.fps = fps;
        self
    }

    pub fn duration_s(&self) -> f64 {
        self.duration.secs()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn channels(&self) -> BTreeSet<ChannelId> {
        self.tracks.iter().map(|t| t.channel.clone()).collect()
    }

    /// Every keyframe, track by track.
    pub fn keyframes(&self) -> Vec<Keyframe<S>> {
        self.tracks
            .iter()
            .enumerate()
            .flat_map(|(i, tr)| {
                tr.knots.iter().map(move |&(t, value)| Keyframe {
                    t,
                    channel: tr.channel.clone(),
                    value,
                    track: i,
                })
            })
            .collect()
    }

    pub fn keyframe_count(&self) -> usize {
        self.tracks.iter().map(|t| t.knots.len()).sum()
    }

    /// Channel value at `t`: max over active intensity tracks, otherwise the
    /// most recently started active track; rest value 0 when nothing is active.
    pub fn evaluate(&self, channel: &ChannelId, t: Tick) -> S {
        let active = self
            .tracks
            .iter()
            .filter(|tr| &tr.channel == channel && tr.covers(t));
        if channel.is_intensity() {
            active.map(|tr| tr.value_at(t)).fold(S::zero(), S::max)
        } else {
            active
                .max_by_key(|tr| tr.first())
                .map(|tr| tr.value_at(t))
                .unwrap_or_else(S::zero)
        }
    }

    /// Number of frames `sample_frames` produces.
    pub fn frame_count(&self) -> u64 {
        let exact = self.duration.secs() * self.fps;
        (exact - 1e-9).ceil().max(0.0) as u64 + 1
    }
}

/// Channel value at `t` seconds; unknown channels read as 0.
pub fn evaluate_envelope<S: Scalar>(timeline: &KeyframeTimeline<S>, channel: &ChannelId, t: f64) -> S {
    timeline.evaluate(channel, Tick::from_secs(t))
}

/// Frames at `k / fps` for `k = 0..=ceil(duration * fps)`.
pub fn sample_frames<S: Scalar>(timeline: &KeyframeTimeline<S>) -> Vec<FramePacket> {
    let channels = timeline.channels();
    (0..timeline.frame_count())
        .map(|k| sample_frame(timeline, &channels, k, Tick::of_frame(k, timeline.fps)))
        .collect()
}

/// One frame with every channel in `channels` evaluated at `tick`.
pub fn sample_frame<S: Scalar>(
    timeline: &KeyframeTimeline<S>,
    channels: &BTreeSet<ChannelId>,
    frame: u64,
    tick: Tick,
) -> FramePacket {
    let mut p = FramePacket::at(frame, tick);
    for ch in channels {
        let v = timeline.evaluate(ch, tick).to_f32_lossy();
        match ch {
            ChannelId::Au(n) => {
                p.au.insert(*n, v.clamp(0.0, 1.0));
            }
            ChannelId::HeadX => p.head.get_or_insert([0.0; 3])[0] = v,
            ChannelId::HeadY => p.head.get_or_insert([0.0; 3])[1] = v,
            ChannelId::HeadZ => p.head.get_or_insert([0.0; 3])[2] = v,
            ChannelId::GazeX => p.gaze.get_or_insert([0.0; 2])[0] = v,
            ChannelId::GazeY => p.gaze.get_or_insert([0.0; 2])[1] = v,
            ChannelId::Joint(j) => {
                p.joints.insert(j.clone(), v);
            }
            ChannelId::Viseme(name) => {
                p.mouth.insert(name.clone(), v.clamp(0.0, 1.0));
            }
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizeError {
    #[error("signal `{signal}`: no {modality} behavior named `{name}` in the libraries")]
    UnknownBehavior {
        signal: String,
        modality: Modality,
        name: String,
    },
}

/// Compile a BML document into a timeline. Conflicts are resolved first.
pub fn realize_timeline<S: Scalar>(
    bml: &BmlDocument,
    libs: &Libraries,
) -> Result<KeyframeTimeline<S>, RealizeError> {
    let signals = resolve_conflicts(&bml.signals);
    let mut tracks = Vec::new();
    let mut duration = Tick::ZERO;
    for s in &signals {
        duration = duration.max(Tick::from_secs(s.end()));
        match s.modality {
            Modality::Face => face_tracks(s, libs, &mut tracks)?,
            Modality::Speech => speech_tracks(s, &mut tracks),
            _ => {
                let entry = libs.gestuary.get(&s.lexeme).ok_or_else(|| {
                    RealizeError::UnknownBehavior {
                        signal: s.id.clone(),
                        modality: s.modality,
                        name: s.lexeme.clone(),
                    }
                })?;
                gesture_tracks(s, entry, &mut tracks);
            }
        }
    }
    Ok(KeyframeTimeline::new(tracks, duration))
}

/// Trapezoid per AU: 0 at start, peak after attack, held until end − decay,
/// 0 at end. Spans shorter than attack + decay compress both ramps
/// proportionally and keep the peak.
fn face_tracks<S: Scalar>(
    s: &Signal,
    libs: &Libraries,
    tracks: &mut Vec<Track<S>>,
) -> Result<(), RealizeError> {
    let face = libs.faces.get(&s.lexeme).ok_or_else(|| RealizeError::UnknownBehavior {
        signal: s.id.clone(),
        modality: Modality::Face,
        name: s.lexeme.clone(),
    })?;
    let start = Tick::from_secs(s.start());
    let end = Tick::from_secs(s.end());
    let span = (end - start).millis();
    if span <= 0 {
        return Ok(());
    }
    let attack = Tick::from_secs(face.attack_s).millis();
    let decay = Tick::from_secs(face.decay_s).millis();
    let (rise, fall) = if attack + decay <= span {
        (attack, decay)
    } else {
        let rise = ((span as f64) * attack as f64 / (attack + decay) as f64).round() as i64;
        let rise = if span >= 2 { rise.clamp(1, span - 1) } else { 0 };
        (rise, span - rise)
    };
    for (&au, &peak) in &face.aus {
        let peak = S::of(peak);
        let mut knots = vec![(start, S::zero()), (start + Tick(rise), peak)];
        let hold_end = end - Tick(fall);
        if hold_end > start + Tick(rise) {
            knots.push((hold_end, peak));
        }
        knots.push((end, S::zero()));
        knots.dedup_by_key(|k| k.0);
        tracks.push(Track::new(&s.id, ChannelId::Au(au), knots));
    }
    Ok(())
}

/// Placeholder lip motion: one open/close cycle per word, words spread
/// evenly over the speech signal.
fn speech_tracks<S: Scalar>(s: &Signal, tracks: &mut Vec<Track<S>>) {
    let words = s.lexeme.split_whitespace().count() as i64;
    let start = Tick::from_secs(s.start());
    let span = (Tick::from_secs(s.end()) - start).millis();
    if words == 0 || span <= 0 {
        return;
    }
    let boundary = |k: i64| start + Tick(span * k / words);
    let mut knots = vec![(start, S::zero())];
    for k in 0..words {
        let (a, b) = (boundary(k), boundary(k + 1));
        if (b - a).millis() >= 2 {
            knots.push((a + Tick((b - a).millis() / 2), S::of(VISEME_PEAK)));
        }
        knots.push((b, S::zero()));
    }
    knots.dedup_by_key(|k| k.0);
    tracks.push(Track::new(&s.id, ChannelId::Viseme(OPEN_VISEME.into()), knots));
}

/// Channels driven by one joint of a pose. `head` and `gaze` map onto the
/// dedicated head/gaze channels; every other joint gets three JOINT channels.
fn joint_channels(joint: &str) -> Vec<(usize, ChannelId)> {
    match joint {
        "head" => vec![(0, ChannelId::HeadX), (1, ChannelId::HeadY), (2, ChannelId::HeadZ)],
        "gaze" => vec![(0, ChannelId::GazeX), (1, ChannelId::GazeY)],
        _ => ["x", "y", "z"]
            .iter()
            .enumerate()
            .map(|(i, axis)| (i, ChannelId::Joint(format!("{joint}.{axis}"))))
            .collect(),
    }
}

/// Phase keys are stretched over their phase window:
/// preparation `[start, stroke_start|ready|stroke]`, stroke
/// `[stroke_start|stroke, stroke_end|stroke]`, retraction
/// `[stroke_end|relax|stroke, end]`. Where windows meet, stroke keys win.
fn gesture_tracks<S: Scalar>(s: &Signal, entry: &GestuaryEntry, tracks: &mut Vec<Track<S>>) {
    let start = Tick::from_secs(s.start());
    let end = Tick::from_secs(s.end());
    let tick = |p: SyncPoint| s.get(p).map(Tick::from_secs);
    let stroke = tick(SyncPoint::Stroke)
        .or_else(|| tick(SyncPoint::StrokeStart))
        .unwrap_or(Tick((start.millis() + end.millis()) / 2));
    let prep_end = tick(SyncPoint::StrokeStart)
        .or_else(|| tick(SyncPoint::Ready))
        .unwrap_or(stroke);
    let stroke_begin = tick(SyncPoint::StrokeStart).unwrap_or(stroke);
    let stroke_finish = tick(SyncPoint::StrokeEnd).unwrap_or(stroke);
    let retract_begin = tick(SyncPoint::StrokeEnd)
        .or_else(|| tick(SyncPoint::Relax))
        .unwrap_or(stroke);

    let mut per_channel: BTreeMap<ChannelId, BTreeMap<Tick, S>> = BTreeMap::new();
    let windows = [
        (GesturePhase::Preparation, start, prep_end),
        (GesturePhase::Retraction, retract_begin, end),
        (GesturePhase::Stroke, stroke_begin, stroke_finish),
    ];
    for (phase, a, b) in windows {
        for key in entry.phase(phase) {
            let at = a + Tick(((b - a).millis() as f64 * key.t).round() as i64);
            for (joint, rot) in &key.pose {
                for (axis, ch) in joint_channels(joint) {
                    per_channel
                        .entry(ch)
                        .or_default()
                        .insert(at, S::of(rot[axis]));
                }
            }
        }
    }
    for (ch, knots) in per_channel {
        tracks.push(Track::new(&s.id, ch, knots.into_iter().collect()));
    }
}
