//! The fixed-rate frame driver.

use std::io::Write;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::time::Duration;

use super::merge::{merge_channels, ChannelToggles, FrameSource, SourcePriority};
use super::osc::encode_frame_osc;
use super::{write_frame_stream, FrameLevelConfig, FramePacket};
use crate::time::{Clock, Tick};

/// Receives each emitted frame, already OSC-encoded.
pub trait FrameSink {
    fn send(&mut self, packet: &FramePacket, osc: &[u8]) -> std::io::Result<()>;
}

/// Collects frames in memory.
#[derive(Debug, Default)]
pub struct VecSink {
    pub packets: Vec<FramePacket>,
    pub datagrams: Vec<Vec<u8>>,
}

impl FrameSink for VecSink {
    fn send(&mut self, packet: &FramePacket, osc: &[u8]) -> std::io::Result<()> {
        self.packets.push(packet.clone());
        self.datagrams.push(osc.to_vec());
        Ok(())
    }
}

/// Discards frames.
#[derive(Debug, Default)]
pub struct NullSink;

impl FrameSink for NullSink {
    fn send(&mut self, _packet: &FramePacket, _osc: &[u8]) -> std::io::Result<()> {
        Ok(())
    }
}

/// Sends each bundle as one UDP datagram. The socket is left unconnected so
/// an absent receiver does not surface as an error.
pub struct UdpSink {
    socket: UdpSocket,
    target: SocketAddr,
}

impl UdpSink {
    /// `target` is `udp:<host>:<port>` or plain `<host>:<port>`.
    pub fn connect(target: &str) -> std::io::Result<Self> {
        let addr = target.strip_prefix("udp:").unwrap_or(target);
        let target = addr.to_socket_addrs()?.next().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("no address for `{addr}`"))
        })?;
        let bind = if target.is_ipv4() { "0.0.0.0:0" } else { "[::]:0" };
        Ok(UdpSink {
            socket: UdpSocket::bind(bind)?,
            target,
        })
    }
}

impl FrameSink for UdpSink {
    fn send(&mut self, _packet: &FramePacket, osc: &[u8]) -> std::io::Result<()> {
        self.socket.send_to(osc, self.target).map(|_| ())
    }
}

/// Writes the newline-delimited frame stream.
pub struct StreamSink<W: Write> {
    out: W,
}

impl<W: Write> StreamSink<W> {
    pub fn new(out: W) -> Self {
        StreamSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> FrameSink for StreamSink<W> {
    fn send(&mut self, packet: &FramePacket, _osc: &[u8]) -> std::io::Result<()> {
        write_frame_stream(&mut self.out, std::slice::from_ref(packet))
    }
}

/// Fans one frame out to several sinks; the first failure wins.
pub struct TeeSink<'a> {
    pub sinks: Vec<&'a mut dyn FrameSink>,
}

impl FrameSink for TeeSink<'_> {
    fn send(&mut self, packet: &FramePacket, osc: &[u8]) -> std::io::Result<()> {
        self.sinks.iter_mut().try_for_each(|s| s.send(packet, osc))
    }
}

/// Absolute deadlines `k / fps` from the loop start, so lateness in one tick
/// never shifts the next.
#[derive(Debug, Clone, Copy)]
pub struct Pacer {
    pub fps: f64,
}

impl Pacer {
    pub fn deadline(&self, k: u64) -> Duration {
        Duration::from_nanos((k as f64 * 1e9 / self.fps).round() as u64)
    }

    pub fn period(&self) -> Duration {
        Duration::from_nanos((1e9 / self.fps).round() as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickStat {
    pub frame: u64,
    pub tick: Tick,
    pub deadline: Duration,
    pub started: Duration,
    pub latency: Duration,
}

impl TickStat {
    pub fn jitter(&self) -> Duration {
        self.started.saturating_sub(self.deadline)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TickLoopReport {
    pub frames_emitted: u64,
    pub ticks: Vec<TickStat>,
    /// Frame index at which the sink or encoder failed.
    pub failed_at: Option<u64>,
    pub error: Option<String>,
}

impl TickLoopReport {
    /// Mean spacing between consecutive tick starts, in seconds.
    pub fn mean_period_s(&self) -> Option<f64> {
        let (first, last) = (self.ticks.first()?, self.ticks.last()?);
        if self.ticks.len() < 2 {
            return None;
        }
        Some((last.started - first.started).as_secs_f64() / (self.ticks.len() - 1) as f64)
    }

    pub fn max_jitter(&self) -> Duration {
        self.ticks.iter().map(TickStat::jitter).max().unwrap_or_default()
    }

    pub fn mean_latency_s(&self) -> f64 {
        if self.ticks.is_empty() {
            return 0.0;
        }
        self.ticks.iter().map(|t| t.latency.as_secs_f64()).sum::<f64>() / self.ticks.len() as f64
    }
}

/// Merge one tick's worth of source output.
pub fn merge_tick(
    sources: &mut [Box<dyn FrameSource>],
    frame: u64,
    tick: Tick,
    priority: &SourcePriority,
    toggles: &ChannelToggles,
) -> FramePacket {
    let polled: Vec<_> = sources
        .iter_mut()
        .filter(|s| toggles.blinks || s.kind() != super::SourceKind::AutoBlink)
        .filter_map(|s| s.poll(frame, tick).map(|p| (s.kind(), p)))
        .collect();
    let layers: Vec<_> = polled.iter().map(|(k, p)| (*k, p)).collect();
    merge_channels(frame, tick, &layers, priority, toggles)
}

/// Emit `frames` merged frames at `cfg.fps`.
pub fn tick_loop(
    sources: &mut [Box<dyn FrameSource>],
    sink: &mut dyn FrameSink,
    cfg: &FrameLevelConfig,
    clock: &dyn Clock,
    frames: u64,
) -> TickLoopReport {
    assert!(cfg.fps > 0.0, "fps must be positive");
    let pacer = Pacer { fps: cfg.fps };
    let origin = clock.now();
    let mut report = TickLoopReport::default();
    for k in 0..frames {
        let deadline = origin + pacer.deadline(k);
        clock.sleep_until(deadline);
        let started = clock.now();
        let tick = Tick::of_frame(k, cfg.fps);
        let packet = merge_tick(sources, k, tick, &cfg.priority, &cfg.enable);
        let sent = encode_frame_osc(&packet)
            .map_err(|e| e.to_string())
            .and_then(|bytes| sink.send(&packet, &bytes).map_err(|e| e.to_string()));
        let finished = clock.now();
        report.ticks.push(TickStat {
            frame: k,
            tick,
            deadline: deadline - origin,
            started: started - origin,
            latency: finished - started,
        });
        if let Err(e) = sent {
            log::error!("frame {k}: {e}");
            report.failed_at = Some(k);
            report.error = Some(e);
            break;
        }
        report.frames_emitted += 1;
    }
    report
}
