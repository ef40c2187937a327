//! Chunk dispatch with live interruption control.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc::{Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::time::Duration;

use super::chunk::{rest_chunk, Chunk};
use crate::realizer::{ChannelId, KeyframeTimeline};
use crate::scalar::Scalar;
use crate::time::{Clock, Tick};

pub const DEFAULT_CHUNK_PERIOD_S: f64 = 0.5;
pub const DEFAULT_REST_TRANSITION_S: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Idle,
    Running,
    Paused,
    Stopped,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Idle => "IDLE",
            Mode::Running => "RUNNING",
            Mode::Paused => "PAUSED",
            Mode::Stopped => "STOPPED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlCommand {
    Interrupt,
    Resume,
    Stop,
    Clear,
}

impl fmt::Display for ControlCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlCommand::Interrupt => "INTERRUPT",
            ControlCommand::Resume => "RESUME",
            ControlCommand::Stop => "STOP",
            ControlCommand::Clear => "CLEAR",
        })
    }
}

impl FromStr for ControlCommand {
    type Err = String;

    /// Case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "INTERRUPT" => Ok(ControlCommand::Interrupt),
            "RESUME" => Ok(ControlCommand::Resume),
            "STOP" => Ok(ControlCommand::Stop),
            "CLEAR" => Ok(ControlCommand::Clear),
            _ => Err(format!("unknown command `{}`", s.trim())),
        }
    }
}

/// Reply line for the control socket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlResponse {
    Ok(Mode),
    Warn(String),
}

impl fmt::Display for ControlResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlResponse::Ok(m) => write!(f, "OK {m}"),
            ControlResponse::Warn(r) => write!(f, "WARN {r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerConfig {
    pub rest_transition_s: f64,
    /// RESUME re-sends the last dispatched chunk instead of continuing after it.
    pub resume_replay_last: bool,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            rest_transition_s: DEFAULT_REST_TRANSITION_S,
            resume_replay_last: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchedulerState<S: Scalar> {
    pub mode: Mode,
    /// Index into `queue` of the next chunk to send.
    pub cursor: usize,
    pub queue: Vec<Chunk<S>>,
    pub config: SchedulerConfig,
    /// Clock time that timeline time 0 maps to.
    epoch: Duration,
    /// Timeline position frozen by INTERRUPT.
    paused_at: Tick,
    timeline: Option<KeyframeTimeline<S>>,
}

/// What a control command did.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutcome<S: Scalar> {
    pub response: ControlResponse,
    /// Chunk to send right away (the STOP rest transition).
    pub emit: Option<Chunk<S>>,
}

impl<S: Scalar> SchedulerState<S> {
    pub fn new(chunks: Vec<Chunk<S>>) -> Self {
        SchedulerState {
            mode: Mode::Idle,
            cursor: 0,
            queue: chunks,
            config: SchedulerConfig::default(),
            epoch: Duration::ZERO,
            paused_at: Tick::ZERO,
            timeline: None,
        }
    }

    pub fn with_config(mut self, config: SchedulerConfig) -> Self {
        self.config = config;
        self
    }

    /// Keep the source timeline so STOP can ramp from interpolated values
    /// rather than the last keyframes.
    pub fn with_timeline(mut self, timeline: KeyframeTimeline<S>) -> Self {
        self.timeline = Some(timeline);
        self
    }

    pub fn remaining(&self) -> usize {
        self.queue.len() - self.cursor
    }

    pub fn next_chunk(&self) -> Option<&Chunk<S>> {
        self.queue.get(self.cursor)
    }

    /// Clock time at which the next chunk is due.
    pub fn next_deadline(&self) -> Option<Duration> {
        self.next_chunk().map(|c| self.epoch + c.start.as_duration())
    }

    /// IDLE → RUNNING with the first chunk due at `now`.
    pub fn start(&mut self, now: Duration) -> bool {
        if self.mode != Mode::Idle || self.remaining() == 0 {
            return false;
        }
        self.mode = Mode::Running;
        self.epoch = now.saturating_sub(self.next_chunk().unwrap().start.as_duration());
        true
    }

    /// Mark the next chunk as sent.
    pub fn advance(&mut self) -> Option<Chunk<S>> {
        let c = self.queue.get(self.cursor).cloned()?;
        self.cursor += 1;
        Some(c)
    }

    fn timeline_position(&self, now: Duration) -> Tick {
        match self.mode {
            Mode::Running => Tick::floor_duration(now.saturating_sub(self.epoch)),
            _ => self.paused_at,
        }
    }

    /// Channel values at timeline position `at`.
    fn pose_at(&self, at: Tick) -> BTreeMap<ChannelId, S> {
        if let Some(tl) = &self.timeline {
            return tl.channels().into_iter().map(|ch| {
                let v = tl.evaluate(&ch, at);
                (ch, v)
            }).collect();
        }
        let mut pose = BTreeMap::new();
        let mut latest: BTreeMap<ChannelId, Tick> = BTreeMap::new();
        for kf in self.queue.iter().filter(|c| !c.is_rest()).flat_map(|c| &c.keyframes) {
            pose.entry(kf.channel.clone()).or_insert(S::zero());
            if kf.t <= at && latest.get(&kf.channel).is_none_or(|t| *t <= kf.t) {
                latest.insert(kf.channel.clone(), kf.t);
                pose.insert(kf.channel.clone(), kf.value);
            }
        }
        pose
    }

    pub fn apply_control(&mut self, cmd: ControlCommand, now: Duration) -> ControlOutcome<S> {
        let warn = |reason: String| ControlOutcome {
            response: ControlResponse::Warn(reason),
            emit: None,
        };
        let mut emit = None;
        match cmd {
            ControlCommand::Interrupt => {
                if self.mode != Mode::Running {
                    return warn(format!("INTERRUPT ignored while {}", self.mode));
                }
                self.paused_at = self.timeline_position(now);
                self.mode = Mode::Paused;
            }
            ControlCommand::Resume => {
                if self.mode != Mode::Paused {
                    return warn(format!("RESUME ignored while {}", self.mode));
                }
                if self.config.resume_replay_last && self.cursor > 0 {
                    self.cursor -= 1;
                }
                match self.next_chunk() {
                    Some(c) => {
                        self.epoch = now.saturating_sub(c.start.as_duration());
                        self.mode = Mode::Running;
                    }
                    None => self.mode = Mode::Idle,
                }
            }
            ControlCommand::Stop => {
                if self.mode == Mode::Stopped {
                    return warn("STOP ignored while STOPPED".into());
                }
                let at = self.timeline_position(now);
                let pose = self.pose_at(at);
                let ramp = Tick::from_secs(self.config.rest_transition_s);
                emit = Some(rest_chunk(self.cursor, at, ramp, &pose));
                self.queue.clear();
                self.cursor = 0;
                self.mode = Mode::Stopped;
            }
            ControlCommand::Clear => {
                self.queue.clear();
                self.cursor = 0;
                self.mode = Mode::Idle;
            }
        }
        ControlOutcome {
            response: ControlResponse::Ok(self.mode),
            emit,
        }
    }
}

/// Receives dispatched chunks.
pub trait ChunkSink<S: Scalar> {
    fn send(&mut self, chunk: &Chunk<S>, at: Duration) -> std::io::Result<()>;
}

/// Collects `(dispatch time, chunk)` pairs.
#[derive(Debug, Default)]
pub struct VecChunkSink<S: Scalar> {
    pub sent: Vec<(Duration, Chunk<S>)>,
}

impl<S: Scalar> ChunkSink<S> for VecChunkSink<S> {
    fn send(&mut self, chunk: &Chunk<S>, at: Duration) -> std::io::Result<()> {
        self.sent.push((at, chunk.clone()));
        Ok(())
    }
}

pub enum ControlEvent {
    Command(ControlCommand),
    /// The deadline passed with no command.
    Deadline,
    /// No more commands will arrive.
    Closed,
}

/// Serialized command queue feeding the scheduler.
pub trait ControlSource {
    /// Wait for a command until `deadline` (forever when `None`).
    fn wait(&mut self, clock: &dyn Clock, deadline: Option<Duration>) -> ControlEvent;

    fn reply(&mut self, _response: &ControlResponse) {}
}

/// No commands; the scheduler just runs.
pub struct NoControl;

impl ControlSource for NoControl {
    fn wait(&mut self, clock: &dyn Clock, deadline: Option<Duration>) -> ControlEvent {
        match deadline {
            Some(d) => {
                clock.sleep_until(d);
                ControlEvent::Deadline
            }
            None => ControlEvent::Closed,
        }
    }
}

/// Commands at fixed clock times. A command due at the same instant as a
/// chunk is handled first.
#[derive(Debug, Clone)]
pub struct ScriptedControl {
    script: Vec<(Duration, ControlCommand)>,
    next: usize,
    pub replies: Vec<ControlResponse>,
}

impl ScriptedControl {
    pub fn new(mut script: Vec<(Duration, ControlCommand)>) -> Self {
        script.sort_by_key(|(t, _)| *t);
        ScriptedControl {
            script,
            next: 0,
            replies: Vec::new(),
        }
    }

    /// One `<seconds> <COMMAND>` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut script = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (t, cmd) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| format!("line {}: expected `<seconds> <COMMAND>`", n + 1))?;
            let t: f64 = t
                .parse()
                .ok()
                .filter(|t: &f64| t.is_finite() && *t >= 0.0)
                .ok_or_else(|| format!("line {}: bad time `{t}`", n + 1))?;
            let cmd = cmd.parse().map_err(|e| format!("line {}: {e}", n + 1))?;
            script.push((Tick::from_secs(t).as_duration(), cmd));
        }
        Ok(Self::new(script))
    }
}

impl ControlSource for ScriptedControl {
    fn wait(&mut self, clock: &dyn Clock, deadline: Option<Duration>) -> ControlEvent {
        match (self.script.get(self.next), deadline) {
            (Some(&(t, cmd)), d) if d.is_none_or(|d| t <= d) => {
                clock.sleep_until(t);
                self.next += 1;
                ControlEvent::Command(cmd)
            }
            (_, Some(d)) => {
                clock.sleep_until(d);
                ControlEvent::Deadline
            }
            (None, None) => ControlEvent::Closed,
            (Some(_), None) => unreachable!(),
        }
    }

    fn reply(&mut self, response: &ControlResponse) {
        self.replies.push(response.clone());
    }
}

/// A command plus where to send the reply.
pub type ControlMessage = (ControlCommand, Option<Sender<ControlResponse>>);

/// Commands from other threads.
pub struct ChannelControl {
    rx: Receiver<ControlMessage>,
    pending_reply: Option<Sender<ControlResponse>>,
    closed: bool,
}

impl ChannelControl {
    pub fn new(rx: Receiver<ControlMessage>) -> Self {
        ChannelControl {
            rx,
            pending_reply: None,
            closed: false,
        }
    }

    fn take(&mut self, msg: ControlMessage) -> ControlEvent {
        self.pending_reply = msg.1;
        ControlEvent::Command(msg.0)
    }
}

impl ControlSource for ChannelControl {
    fn wait(&mut self, clock: &dyn Clock, deadline: Option<Duration>) -> ControlEvent {
        if !self.closed {
            match self.rx.try_recv() {
                Ok(msg) => return self.take(msg),
                Err(TryRecvError::Disconnected) => self.closed = true,
                Err(TryRecvError::Empty) => {}
            }
        }
        if self.closed || clock.is_virtual() {
            return match deadline {
                Some(d) => {
                    clock.sleep_until(d);
                    ControlEvent::Deadline
                }
                None if self.closed => ControlEvent::Closed,
                None => match self.rx.recv() {
                    Ok(msg) => self.take(msg),
                    Err(_) => {
                        self.closed = true;
                        ControlEvent::Closed
                    }
                },
            };
        }
        let got = match deadline {
            Some(d) => self
                .rx
                .recv_timeout(d.saturating_sub(clock.now()))
                .map_err(|e| e == RecvTimeoutError::Disconnected),
            None => self.rx.recv().map_err(|_| true),
        };
        match got {
            Ok(msg) => self.take(msg),
            Err(disconnected) => {
                self.closed |= disconnected;
                match deadline {
                    Some(d) => {
                        clock.sleep_until(d);
                        ControlEvent::Deadline
                    }
                    None => ControlEvent::Closed,
                }
            }
        }
    }

    fn reply(&mut self, response: &ControlResponse) {
        if let Some(tx) = self.pending_reply.take() {
            let _ = tx.send(response.clone());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Dispatch { at: Duration, index: usize, start: Tick, end: Tick, keyframes: usize },
    Rest { at: Duration, index: usize, start: Tick, end: Tick, keyframes: usize },
    Control { at: Duration, command: ControlCommand, response: ControlResponse },
    SinkFailure { at: Duration, index: usize, error: String },
    Finished { at: Duration, mode: Mode },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DispatchTrace {
    pub events: Vec<TraceEvent>,
}

impl DispatchTrace {
    /// `(index, dispatch time)` of normal chunks, in order.
    pub fn dispatches(&self) -> Vec<(usize, Duration)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Dispatch { at, index, .. } => Some((*index, *at)),
                _ => None,
            })
            .collect()
    }

    pub fn rest_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, TraceEvent::Rest { .. })).count()
    }

    /// Stable text form, one event per line.
    pub fn render(&self) -> String {
        let secs = |d: &Duration| format!("{:.6}", d.as_secs_f64());
        let mut out = String::new();
        for e in &self.events {
            let line = match e {
                TraceEvent::Dispatch { at, index, start, end, keyframes } => {
                    format!("{} dispatch {index} [{start},{end}) keyframes={keyframes}", secs(at))
                }
                TraceEvent::Rest { at, index, start, end, keyframes } => {
                    format!("{} rest {index} [{start},{end}] keyframes={keyframes} silenced", secs(at))
                }
                TraceEvent::Control { at, command, response } => {
                    format!("{} control {command} -> {response}", secs(at))
                }
                TraceEvent::SinkFailure { at, index, error } => {
                    format!("{} sink-failure {index}: {error}", secs(at))
                }
                TraceEvent::Finished { at, mode } => format!("{} finished {mode}", secs(at)),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn send_rest<S: Scalar>(
    rest: &Chunk<S>,
    sink: &mut dyn ChunkSink<S>,
    at: Duration,
    trace: &mut DispatchTrace,
) {
    trace.events.push(TraceEvent::Rest {
        at,
        index: rest.index,
        start: rest.start,
        end: rest.end,
        keyframes: rest.keyframes.len(),
    });
    if let Err(e) = sink.send(rest, at) {
        log::warn!("rest transition not delivered: {e}");
    }
}

/// Dispatch queued chunks at their start times until the queue drains, the
/// scheduler stops or is cleared, or control closes while paused.
pub fn run_schedule<S: Scalar>(
    state: &mut SchedulerState<S>,
    clock: &dyn Clock,
    sink: &mut dyn ChunkSink<S>,
    control: &mut dyn ControlSource,
) -> DispatchTrace {
    let mut trace = DispatchTrace::default();
    state.start(clock.now());
    loop {
        let deadline = match state.mode {
            Mode::Running => match state.next_deadline() {
                Some(d) => Some(d),
                None => {
                    state.mode = Mode::Idle;
                    break;
                }
            },
            Mode::Paused => None,
            Mode::Idle | Mode::Stopped => break,
        };
        match control.wait(clock, deadline) {
            ControlEvent::Command(cmd) => {
                let now = clock.now();
                let outcome = state.apply_control(cmd, now);
                control.reply(&outcome.response);
                trace.events.push(TraceEvent::Control {
                    at: now,
                    command: cmd,
                    response: outcome.response,
                });
                if let Some(rest) = outcome.emit {
                    send_rest(&rest, sink, now, &mut trace);
                }
            }
            ControlEvent::Deadline => {
                let now = clock.now();
                let chunk = state.advance().expect("deadline implies a queued chunk");
                match sink.send(&chunk, now) {
                    Ok(()) => trace.events.push(TraceEvent::Dispatch {
                        at: now,
                        index: chunk.index,
                        start: chunk.start,
                        end: chunk.end,
                        keyframes: chunk.keyframes.len(),
                    }),
                    Err(e) => {
                        log::error!("chunk {} not delivered: {e}", chunk.index);
                        trace.events.push(TraceEvent::SinkFailure {
                            at: now,
                            index: chunk.index,
                            error: e.to_string(),
                        });
                        state.cursor -= 1;
                        let outcome = state.apply_control(ControlCommand::Stop, now);
                        if let Some(rest) = outcome.emit {
                            send_rest(&rest, sink, now, &mut trace);
                        }
                    }
                }
            }
            ControlEvent::Closed => break,
        }
    }
    trace.events.push(TraceEvent::Finished {
        at: clock.now(),
        mode: state.mode,
    });
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incremental::ChunkKind;
    use crate::time::VirtualClock;

    fn chunks(n: usize) -> Vec<Chunk<f64>> {
        (0..n)
            .map(|i| Chunk {
                index: i,
                start: Tick(500 * i as i64),
                end: Tick(500 * (i as i64 + 1)),
                keyframes: Vec::new(),
                kind: ChunkKind::Normal,
            })
            .collect()
    }

    fn secs(s: f64) -> Duration {
        Duration::from_secs_f64(s)
    }

    fn run(n: usize, script: Vec<(Duration, ControlCommand)>) -> (DispatchTrace, SchedulerState<f64>) {
        let mut state = SchedulerState::new(chunks(n));
        let mut sink = VecChunkSink::default();
        let trace = run_schedule(&mut state, &VirtualClock::new(), &mut sink, &mut ScriptedControl::new(script));
        (trace, state)
    }

    #[test]
    fn plain_run_hits_exact_times() {
        let (trace, state) = run(4, vec![]);
        assert_eq!(
            trace.dispatches(),
            vec![(0, secs(0.0)), (1, secs(0.5)), (2, secs(1.0)), (3, secs(1.5))]
        );
        assert_eq!(state.mode, Mode::Idle);
    }

    #[test]
    fn no_chunks_is_immediately_idle() {
        let (trace, state) = run(0, vec![]);
        assert!(trace.dispatches().is_empty());
        assert_eq!(state.mode, Mode::Idle);
    }

    #[test]
    fn interrupt_then_resume_keeps_offsets() {
        let (trace, _) = run(
            4,
            vec![(secs(0.7), ControlCommand::Interrupt), (secs(5.0), ControlCommand::Resume)],
        );
        assert_eq!(
            trace.dispatches(),
            vec![(0, secs(0.0)), (1, secs(0.5)), (2, secs(5.0)), (3, secs(5.5))]
        );
    }

    #[test]
    fn resume_replay_last_resends() {
        let mut state = SchedulerState::new(chunks(4)).with_config(SchedulerConfig {
            resume_replay_last: true,
            ..Default::default()
        });
        let mut ctl = ScriptedControl::new(vec![
            (secs(0.7), ControlCommand::Interrupt),
            (secs(5.0), ControlCommand::Resume),
        ]);
        let trace = run_schedule(&mut state, &VirtualClock::new(), &mut VecChunkSink::default(), &mut ctl);
        let idx: Vec<_> = trace.dispatches().iter().map(|d| d.0).collect();
        assert_eq!(idx, vec![0, 1, 1, 2, 3]);
        assert_eq!(trace.dispatches()[2].1, secs(5.0));
    }

    #[test]
    fn stop_emits_one_rest_chunk() {
        let (trace, state) = run(4, vec![(secs(0.7), ControlCommand::Stop)]);
        assert_eq!(trace.dispatches().len(), 2);
        assert_eq!(trace.rest_count(), 1);
        assert!(state.queue.is_empty());
        assert_eq!(state.mode, Mode::Stopped);
        assert!(matches!(trace.events.last(), Some(TraceEvent::Finished { mode: Mode::Stopped, .. })));
    }

    #[test]
    fn clear_empties_without_rest() {
        let (trace, state) = run(4, vec![(secs(0.7), ControlCommand::Clear)]);
        assert_eq!(trace.rest_count(), 0);
        assert_eq!(state.mode, Mode::Idle);
        assert_eq!(trace.dispatches().len(), 2);
    }

    #[test]
    fn bad_transitions_warn() {
        let mut s = SchedulerState::new(chunks(2));
        let out = s.apply_control(ControlCommand::Interrupt, Duration::ZERO);
        assert_eq!(out.response.to_string(), "WARN INTERRUPT ignored while IDLE");
        s.start(Duration::ZERO);
        let out = s.apply_control(ControlCommand::Resume, Duration::ZERO);
        assert!(matches!(out.response, ControlResponse::Warn(_)));
        assert_eq!(s.mode, Mode::Running);
    }

    #[test]
    fn command_parsing() {
        assert_eq!("interrupt\n".parse::<ControlCommand>(), Ok(ControlCommand::Interrupt));
        assert!("PAUSE".parse::<ControlCommand>().is_err());
        let s = ScriptedControl::parse("# demo\n0.7 INTERRUPT\n5 RESUME\n").unwrap();
        assert_eq!(s.script.len(), 2);
        assert!(ScriptedControl::parse("x STOP").is_err());
    }

    struct Broken;

    impl ChunkSink<f64> for Broken {
        fn send(&mut self, c: &Chunk<f64>, _: Duration) -> std::io::Result<()> {
            if c.index == 2 {
                Err(std::io::Error::other("closed"))
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn sink_failure_stops_with_rest() {
        let mut state = SchedulerState::new(chunks(4));
        let trace = run_schedule(&mut state, &VirtualClock::new(), &mut Broken, &mut NoControl);
        assert_eq!(state.mode, Mode::Stopped);
        assert_eq!(trace.rest_count(), 1);
        assert_eq!(trace.dispatches().len(), 2);
    }

    #[test]
    fn channel_control_delivers_replies() {
        let (tx, rx) = std::sync::mpsc::channel();
        let (rtx, rrx) = std::sync::mpsc::channel();
        tx.send((ControlCommand::Stop, Some(rtx))).unwrap();
        drop(tx);
        let mut state = SchedulerState::new(chunks(4));
        let trace = run_schedule(
            &mut state,
            &VirtualClock::new(),
            &mut VecChunkSink::default(),
            &mut ChannelControl::new(rx),
        );
        assert_eq!(rrx.recv().unwrap(), ControlResponse::Ok(Mode::Stopped));
        assert_eq!(trace.dispatches().len(), 0);
    }
}
