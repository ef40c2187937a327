//! Rendering dispatched chunks as frame packets.

use std::collections::BTreeMap;
use std::time::Duration;

use super::chunk::Chunk;
use super::scheduler::ChunkSink;
use crate::framelevel::{encode_frame_osc, FrameSink};
use crate::realizer::{sample_frame, ChannelId, KeyframeTimeline, Track};
use crate::scalar::Scalar;
use crate::time::Tick;

/// Frame indices whose tick lies in `[start, end)`, or `[start, end]` when
/// `closed`.
pub fn frames_in(start: Tick, end: Tick, closed: bool, fps: f64) -> impl Iterator<Item = (u64, Tick)> {
    let first = ((start.secs() * fps) - 1e-9).ceil().max(0.0) as u64;
    (first..)
        .map(move |k| (k, Tick::of_frame(k, fps)))
        .skip_while(move |(_, t)| *t < start)
        .take_while(move |(_, t)| *t < end || (closed && *t == end))
}

/// Timeline made of the rest chunk's own keyframes.
fn rest_timeline<S: Scalar>(chunk: &Chunk<S>, fps: f64) -> KeyframeTimeline<S> {
    let mut per_channel: BTreeMap<ChannelId, Vec<(Tick, S)>> = BTreeMap::new();
    for kf in &chunk.keyframes {
        per_channel.entry(kf.channel.clone()).or_default().push((kf.t, kf.value));
    }
    let tracks = per_channel
        .into_iter()
        .map(|(ch, mut knots)| {
            knots.sort_by_key(|(t, _)| *t);
            knots.dedup_by_key(|(t, _)| *t);
            Track::new("rest", ch, knots)
        })
        .collect();
    KeyframeTimeline::new(tracks, chunk.end).with_fps(fps)
}

/// Sends every frame a chunk covers as soon as the chunk is dispatched. Each
/// bundle's timetag carries the frame's timeline time.
pub struct FrameChunkSink<'a, S: Scalar> {
    timeline: &'a KeyframeTimeline<S>,
    out: &'a mut dyn FrameSink,
    pub frames_sent: u64,
}

impl<'a, S: Scalar> FrameChunkSink<'a, S> {
    pub fn new(timeline: &'a KeyframeTimeline<S>, out: &'a mut dyn FrameSink) -> Self {
        FrameChunkSink {
            timeline,
            out,
            frames_sent: 0,
        }
    }
}

impl<S: Scalar> ChunkSink<S> for FrameChunkSink<'_, S> {
    fn send(&mut self, chunk: &Chunk<S>, _at: Duration) -> std::io::Result<()> {
        let fps = self.timeline.fps;
        let (source, closed, end) = if chunk.is_rest() {
            (rest_timeline(chunk, fps), true, chunk.end)
        } else if chunk.end >= self.timeline.duration {
            // The final frame may fall just past the duration.
            let last = Tick::of_frame(self.timeline.frame_count() - 1, fps);
            (self.timeline.clone(), true, chunk.end.max(last))
        } else {
            (self.timeline.clone(), false, chunk.end)
        };
        let channels = source.channels();
        for (k, tick) in frames_in(chunk.start, end, closed, fps) {
            let p = sample_frame(&source, &channels, k, tick);
            let bytes = encode_frame_osc(&p).map_err(std::io::Error::other)?;
            self.out.send(&p, &bytes)?;
            self.frames_sent += 1;
        }
        Ok(())
    }
}
