//! Per-tick channel merging across behavior sources.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::Deserialize;

use super::blink::{BlinkConfig, BlinkSchedule};
use super::FramePacket;
use crate::realizer::{sample_frames, KeyframeTimeline};
use crate::scalar::Scalar;
use crate::time::Tick;

/// Producers of per-frame channel values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceKind {
    SpeechMouth,
    External,
    AutoBlink,
}

/// Precedence between sources, highest first. Channels no source populates
/// fall back to the rest value 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourcePriority {
    order: Vec<SourceKind>,
}

impl Default for SourcePriority {
    fn default() -> Self {
        SourcePriority {
            order: vec![SourceKind::SpeechMouth, SourceKind::External, SourceKind::AutoBlink],
        }
    }
}

impl SourcePriority {
    /// `order` must list every source kind exactly once.
    pub fn new(order: Vec<SourceKind>) -> Option<Self> {
        let mut sorted = order.clone();
        sorted.sort();
        sorted.dedup();
        (sorted.len() == 3 && order.len() == 3).then_some(SourcePriority { order })
    }

    /// Lower is stronger.
    pub fn rank(&self, kind: SourceKind) -> usize {
        self.order.iter().position(|k| *k == kind).unwrap_or(usize::MAX)
    }
}

/// Which channel groups the frame-level realizer emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(default)]
pub struct ChannelToggles {
    pub au: bool,
    pub head: bool,
    pub gaze: bool,
    pub mouth: bool,
    pub joints: bool,
    pub blinks: bool,
}

impl Default for ChannelToggles {
    fn default() -> Self {
        ChannelToggles {
            au: true,
            head: true,
            gaze: true,
            mouth: true,
            joints: true,
            blinks: true,
        }
    }
}

fn take_first<K: Ord + Clone, V: Copy>(dst: &mut BTreeMap<K, V>, src: &BTreeMap<K, V>) {
    for (k, v) in src {
        dst.entry(k.clone()).or_insert(*v);
    }
}

/// Merge partial channel sets for one tick. Per channel, the strongest
/// source that populates it wins; head and gaze are single channels.
pub fn merge_channels(
    frame: u64,
    tick: Tick,
    layers: &[(SourceKind, &FramePacket)],
    priority: &SourcePriority,
    toggles: &ChannelToggles,
) -> FramePacket {
    let mut sorted: Vec<&(SourceKind, &FramePacket)> = layers.iter().collect();
    sorted.sort_by_key(|(k, _)| priority.rank(*k));

    let mut out = FramePacket::at(frame, tick);
    for (_, p) in &sorted {
        take_first(&mut out.au, &p.au);
        take_first(&mut out.mouth, &p.mouth);
        take_first(&mut out.joints, &p.joints);
        if out.head.is_none() {
            out.head = p.head;
        }
        if out.gaze.is_none() {
            out.gaze = p.gaze;
        }
    }
    if !toggles.au {
        out.au.clear();
    }
    if !toggles.mouth {
        out.mouth.clear();
    }
    if !toggles.joints {
        out.joints.clear();
    }
    out.head = toggles.head.then(|| out.head.unwrap_or([0.0; 3]));
    out.gaze = toggles.gaze.then(|| out.gaze.unwrap_or([0.0; 2]));
    out
}

/// Something that may populate channels at a tick. Must not block.
pub trait FrameSource: Send {
    fn kind(&self) -> SourceKind;
    fn poll(&mut self, frame: u64, tick: Tick) -> Option<FramePacket>;
}

/// AU45 from a precomputed blink schedule.
pub struct BlinkSource {
    schedule: BlinkSchedule,
}

impl BlinkSource {
    pub fn new(cfg: &BlinkConfig, horizon_s: f64) -> Self {
        BlinkSource {
            schedule: BlinkSchedule::new(cfg, horizon_s),
        }
    }

    pub fn schedule(&self) -> &BlinkSchedule {
        &self.schedule
    }
}

impl FrameSource for BlinkSource {
    fn kind(&self) -> SourceKind {
        SourceKind::AutoBlink
    }

    fn poll(&mut self, frame: u64, tick: Tick) -> Option<FramePacket> {
        let b = self.schedule.active(tick)?;
        let mut p = FramePacket::at(frame, tick);
        p.au.insert(45, b.value_at(tick) as f32);
        Some(p)
    }
}

/// Single-slot mailbox written by a producer context, drained by the tick
/// driver. The driver only ever `try_lock`s, so a busy producer costs one
/// unpopulated tick rather than a stall.
#[derive(Clone, Default)]
pub struct Mailbox {
    slot: Arc<Mutex<Option<FramePacket>>>,
}

impl Mailbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn post(&self, p: FramePacket) {
        if let Ok(mut slot) = self.slot.lock() {
            *slot = Some(p);
        }
    }

    pub fn try_take(&self) -> Option<FramePacket> {
        self.slot.try_lock().ok().and_then(|mut s| s.take())
    }
}

pub struct MailboxSource {
    kind: SourceKind,
    mailbox: Mailbox,
}

impl MailboxSource {
    pub fn new(kind: SourceKind, mailbox: Mailbox) -> Self {
        MailboxSource { kind, mailbox }
    }
}

impl FrameSource for MailboxSource {
    fn kind(&self) -> SourceKind {
        self.kind
    }

    fn poll(&mut self, _frame: u64, _tick: Tick) -> Option<FramePacket> {
        self.mailbox.try_take()
    }
}

/// Replays pre-computed frames by tick, holding the most recent one.
pub struct ScriptedSource {
    kind: SourceKind,
    frames: Vec<FramePacket>,
    hold: bool,
}

impl ScriptedSource {
    /// `frames` sorted by tick. With `hold`, the latest frame at or before the
    /// tick is reused; otherwise only exact tick matches populate.
    pub fn new(kind: SourceKind, mut frames: Vec<FramePacket>, hold: bool) -> Self {
        frames.sort_by_key(|f| f.tick);
        ScriptedSource { kind, frames, hold }
    }

    /// Mouth channels of a realized timeline, as speech-driven input.
    pub fn speech_mouth<S: Scalar>(timeline: &KeyframeTimeline<S>) -> Self {
        let frames = sample_frames(timeline)
            .into_iter()
            .map(|f| FramePacket {
                mouth: f.mouth,
                ..FramePacket::at(f.frame, f.tick)
            })
            .filter(|f| !f.mouth.is_empty())
            .collect();
        ScriptedSource::new(SourceKind::SpeechMouth, frames, false)
    }
}

impl FrameSource for ScriptedSource {
    fn kind(&self) -> SourceKind {
        self.kind
    }

    fn poll(&mut self, _frame: u64, tick: Tick) -> Option<FramePacket> {
        let i = self.frames.partition_point(|f| f.tick <= tick);
        let f = self.frames.get(i.checked_sub(1)?)?;
        (self.hold || f.tick == tick).then(|| f.clone())
    }
}
