//! Partitioning a timeline into fixed-period chunks.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::realizer::{ChannelId, Keyframe, KeyframeTimeline};
use crate::scalar::Scalar;
use crate::time::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkKind {
    Normal,
    /// Return-to-rest emitted by STOP; `silenced` marks the speech channels
    /// as cut.
    Rest { silenced: bool },
}

/// Keyframes in `[start, end)`; the last chunk of a timeline is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk<S: Scalar> {
    pub index: usize,
    pub start: Tick,
    pub end: Tick,
    pub keyframes: Vec<Keyframe<S>>,
    pub kind: ChunkKind,
}

impl<S: Scalar> Chunk<S> {
    pub fn is_rest(&self) -> bool {
        matches!(self.kind, ChunkKind::Rest { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChunkError {
    #[error("chunk period must be positive, got {0}")]
    NonPositivePeriod(f64),
}

/// Start of chunk `i`, rounded to the tick grid.
pub fn chunk_boundary(i: usize, period_s: f64) -> Tick {
    Tick::from_secs(i as f64 * period_s)
}

/// Number of chunks covering `duration`: `ceil(duration / period)`, and at
/// least one when there are keyframes (a timeline whose only keyframes sit at
/// 0 has zero duration).
pub fn chunk_count(duration: Tick, period_s: f64, has_keyframes: bool) -> usize {
    if !has_keyframes {
        return 0;
    }
    let mut n = 0usize;
    while chunk_boundary(n, period_s) < duration {
        n += 1;
    }
    n.max(1)
}

pub fn chunk_timeline<S: Scalar>(
    timeline: &KeyframeTimeline<S>,
    period_s: f64,
) -> Result<Vec<Chunk<S>>, ChunkError> {
    if !(period_s > 0.0) || !period_s.is_finite() {
        return Err(ChunkError::NonPositivePeriod(period_s));
    }
    let keyframes = timeline.keyframes();
    let n = chunk_count(timeline.duration, period_s, !keyframes.is_empty());
    let mut chunks: Vec<Chunk<S>> = (0..n)
        .map(|i| Chunk {
            index: i,
            start: chunk_boundary(i, period_s),
            end: if i + 1 == n {
                timeline.duration.max(chunk_boundary(i, period_s))
            } else {
                chunk_boundary(i + 1, period_s)
            },
            keyframes: Vec::new(),
            kind: ChunkKind::Normal,
        })
        .collect();
    for kf in keyframes {
        // Last chunk with start <= t; boundaries are increasing.
        let i = chunks.partition_point(|c| c.start <= kf.t).saturating_sub(1);
        chunks[i].keyframes.push(kf);
    }
    for c in &mut chunks {
        c.keyframes.sort_by(|a, b| a.t.cmp(&b.t).then(a.track.cmp(&b.track)));
    }
    Ok(chunks)
}

/// Ramp every channel in `from` to 0 over `[at, at + ramp]`; visemes drop to
/// 0 at `at`.
pub fn rest_chunk<S: Scalar>(
    index: usize,
    at: Tick,
    ramp: Tick,
    from: &BTreeMap<ChannelId, S>,
) -> Chunk<S> {
    let mut keyframes = Vec::new();
    for (track, (ch, v)) in from.iter().enumerate() {
        if matches!(ch, ChannelId::Viseme(_)) {
            keyframes.push(Keyframe { t: at, channel: ch.clone(), value: S::zero(), track });
        } else {
            keyframes.push(Keyframe { t: at, channel: ch.clone(), value: *v, track });
            keyframes.push(Keyframe { t: at + ramp, channel: ch.clone(), value: S::zero(), track });
        }
    }
    keyframes.sort_by(|a, b| a.t.cmp(&b.t).then(a.track.cmp(&b.track)));
    Chunk {
        index,
        start: at,
        end: at + ramp,
        keyframes,
        kind: ChunkKind::Rest { silenced: true },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realizer::Track;

    fn timeline(knots: &[i64], duration: i64) -> KeyframeTimeline<f64> {
        let track = Track::new(
            "s",
            ChannelId::Au(4),
            knots.iter().map(|&t| (Tick(t), 0.5)).collect(),
        );
        KeyframeTimeline::new(vec![track], Tick(duration))
    }

    #[test]
    fn two_seconds_by_half() {
        let chunks = chunk_timeline(&timeline(&[0, 700, 1999], 2000), 0.5).unwrap();
        let spans: Vec<_> = chunks.iter().map(|c| (c.start.0, c.end.0)).collect();
        assert_eq!(spans, vec![(0, 500), (500, 1000), (1000, 1500), (1500, 2000)]);
        assert_eq!(chunks[1].keyframes.len(), 1);
    }

    #[test]
    fn boundary_keyframe_goes_right() {
        let chunks = chunk_timeline(&timeline(&[500, 1000], 1000), 0.5).unwrap();
        assert!(chunks[0].keyframes.is_empty());
        assert_eq!(chunks[1].keyframes.len(), 2, "end keyframe stays in closed last chunk");
    }

    #[test]
    fn empty_timeline_has_no_chunks() {
        let tl = KeyframeTimeline::<f64>::default();
        assert!(chunk_timeline(&tl, 0.5).unwrap().is_empty());
    }

    #[test]
    fn zero_duration_with_keyframe() {
        let chunks = chunk_timeline(&timeline(&[0], 0), 0.5).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].keyframes.len(), 1);
    }

    #[test]
    fn bad_period() {
        let tl = timeline(&[0, 100], 100);
        assert!(chunk_timeline(&tl, 0.0).is_err());
        assert!(chunk_timeline(&tl, -1.0).is_err());
        assert!(chunk_timeline(&tl, f64::NAN).is_err());
    }

    #[test]
    fn rest_cuts_visemes_and_ramps_the_rest() {
        let from = BTreeMap::from([
            (ChannelId::Au(4), 0.8),
            (ChannelId::Viseme("open".into()), 0.6),
        ]);
        let c = rest_chunk(3, Tick(700), Tick(400), &from);
        assert_eq!(c.end, Tick(1100));
        let vis: Vec<_> = c.keyframes.iter().filter(|k| k.channel.is_intensity() && matches!(k.channel, ChannelId::Viseme(_))).collect();
        assert_eq!(vis.len(), 1);
        assert_eq!((vis[0].t, vis[0].value), (Tick(700), 0.0));
        assert!(c.keyframes.iter().any(|k| k.t == Tick(1100) && k.channel == ChannelId::Au(4) && k.value == 0.0));
    }
}
