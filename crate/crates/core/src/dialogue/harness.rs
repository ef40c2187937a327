//! Closed perception → turn-taking → frame loop with timing accounting.

use std::io::Write;
use std::sync::mpsc::Sender;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::features::{detect_voice, resample_features, FeatureSample, StreamKind};
use super::scenario::{Scenario, StageLatency};
use super::turn::{update_turn_state, TurnMode, TurnState};
use crate::framelevel::{
    encode_frame_osc, merge_channels, BlinkSource, ChannelToggles, FramePacket,
    FrameSink, FrameSource, Pacer, SourceKind, SourcePriority,
};
use crate::incremental::{ControlCommand, ControlMessage};
use crate::realizer::{ChannelId, OPEN_VISEME, VISEME_PEAK};
use crate::time::{Clock, Tick};

/// One row of the loop report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TickRow {
    pub frame: u64,
    pub t: f64,
    pub perception_s: f64,
    pub generation_s: f64,
    pub io_s: f64,
    pub total_s: f64,
    pub dropped: bool,
    /// Start of processing relative to the tick deadline.
    pub lateness_s: f64,
    pub agent_speaking: bool,
    pub user_vad: bool,
    pub turn: String,
    pub commands: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoopReport {
    pub rows: Vec<TickRow>,
    pub frames_emitted: u64,
    pub drops: u64,
    pub commands: Vec<(Tick, ControlCommand)>,
    /// Sink failure, if the loop ended early.
    pub error: Option<String>,
}

impl LoopReport {
    pub fn max_total_s(&self) -> f64 {
        self.rows.iter().filter(|r| !r.dropped).map(|r| r.total_s).fold(0.0, f64::max)
    }

    /// Mean spacing of processed ticks' start times.
    pub fn mean_period_s(&self) -> Option<f64> {
        let starts: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| !r.dropped)
            .map(|r| r.t + r.lateness_s)
            .collect();
        (starts.len() >= 2).then(|| (starts[starts.len() - 1] - starts[0]) / (starts.len() - 1) as f64)
    }

    pub fn max_jitter_s(&self) -> f64 {
        self.rows.iter().filter(|r| !r.dropped).map(|r| r.lateness_s).fold(0.0, f64::max)
    }

    pub fn tick_spacing_ms(&self) -> Vec<i64> {
        self.rows
            .windows(2)
            .map(|w| Tick::from_secs(w[1].t).0 - Tick::from_secs(w[0].t).0)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "frames={} drops={} max_total={:.6}s mean_period={} max_jitter={:.6}s commands={}",
            self.frames_emitted,
            self.drops,
            self.max_total_s(),
            self.mean_period_s().map_or("-".into(), |p| format!("{p:.6}s")),
            self.max_jitter_s(),
            self.commands.len()
        )
    }
}

struct TickPipeline<'a> {
    scenario: &'a Scenario,
    audio: Vec<FeatureSample>,
    turn: TurnState,
    /// The agent was interrupted and has not resumed.
    held: bool,
    blink: BlinkSource,
    priority: SourcePriority,
    toggles: ChannelToggles,
}

struct TickOutput {
    user_vad: bool,
    agent_speaking: bool,
    commands: Vec<ControlCommand>,
    packet: FramePacket,
}

impl<'a> TickPipeline<'a> {
    fn new(scenario: &'a Scenario, horizon_s: f64) -> Self {
        TickPipeline {
            scenario,
            audio: scenario.stream(StreamKind::Audio),
            turn: TurnState::default(),
            held: false,
            blink: BlinkSource::new(&scenario.blink, horizon_s),
            priority: SourcePriority::default(),
            toggles: scenario.enable,
        }
    }

    fn perceive(&self, tick: Tick) -> bool {
        match self.scenario.scripted_vad_at(tick) {
            Some(v) => v,
            None => {
                let sample = resample_features(&self.audio, &[tick])[0];
                detect_voice(sample, &self.scenario.vad)
            }
        }
    }

    fn generate(&mut self, frame: u64, tick: Tick, user_vad: bool) -> TickOutput {
        let scripted = self.scenario.agent_speaking_at(tick);
        // An interrupted agent is silent until it resumes.
        let agent_speaking = scripted && !self.held;
        let (next, commands) = update_turn_state(&self.turn, agent_speaking, user_vad, tick, &self.scenario.turn);
        self.turn = next;
        for c in &commands {
            match c {
                ControlCommand::Interrupt => self.held = true,
                ControlCommand::Resume => self.held = false,
                _ => {}
            }
        }

        let mut speech = FramePacket::at(frame, tick);
        if scripted && !self.held {
            speech.mouth.insert(OPEN_VISEME.to_string(), VISEME_PEAK as f32);
        }
        let mut external = FramePacket::at(frame, tick);
        for span in self.scenario.external.iter().filter(|s| s.from <= tick && tick < s.to) {
            apply_channel(&mut external, &span.channel, span.value);
        }
        let blink = if self.toggles.blinks { self.blink.poll(frame, tick) } else { None };
        let mut layers = vec![(SourceKind::SpeechMouth, &speech), (SourceKind::External, &external)];
        if let Some(b) = &blink {
            layers.push((SourceKind::AutoBlink, b));
        }
        let packet = merge_channels(frame, tick, &layers, &self.priority, &self.toggles);
        TickOutput {
            user_vad,
            agent_speaking,
            commands,
            packet,
        }
    }
}

fn apply_channel(p: &mut FramePacket, ch: &ChannelId, v: f32) {
    match ch {
        ChannelId::Au(n) => {
            p.au.insert(*n, v);
        }
        ChannelId::HeadX => p.head.get_or_insert([0.0; 3])[0] = v,
        ChannelId::HeadY => p.head.get_or_insert([0.0; 3])[1] = v,
        ChannelId::HeadZ => p.head.get_or_insert([0.0; 3])[2] = v,
        ChannelId::GazeX => p.gaze.get_or_insert([0.0; 2])[0] = v,
        ChannelId::GazeY => p.gaze.get_or_insert([0.0; 2])[1] = v,
        ChannelId::Joint(j) => {
            p.joints.insert(j.clone(), v);
        }
        ChannelId::Viseme(m) => {
            p.mouth.insert(m.clone(), v);
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Number of ticks in `duration_s` at `fps`.
pub fn tick_count(duration_s: f64, fps: f64) -> u64 {
    (duration_s * fps - 1e-9).ceil().max(0.0) as u64
}

/// Run the loop for `duration_s`.
///
/// On a virtual clock the scenario's scripted stage latencies are charged to
/// each processed tick; a tick whose deadline arrives while the previous one
/// is still busy is dropped. On a wall clock the stages are timed for real
/// and a tick is dropped when processing starts a full period late.
///
/// Emitted commands are forwarded to `commands_out` when given.
pub fn run_interaction_loop(
    scenario: &Scenario,
    duration_s: f64,
    clock: &dyn Clock,
    sink: &mut dyn FrameSink,
    commands_out: Option<&Sender<ControlMessage>>,
) -> LoopReport {
    let fps = scenario.fps;
    let pacer = Pacer { fps };
    let n = tick_count(duration_s, fps);
    let mut pipeline = TickPipeline::new(scenario, duration_s);
    let mut report = LoopReport::default();
    let origin = clock.now();
    let mut busy_until = Duration::ZERO;

    for k in 0..n {
        let deadline = pacer.deadline(k);
        let tick = Tick::of_frame(k, fps);
        clock.sleep_until(origin + deadline);
        let started = clock.now() - origin;
        let lateness = started.saturating_sub(deadline);

        let dropped = if clock.is_virtual() {
            busy_until > deadline
        } else {
            lateness >= pacer.period()
        };
        if dropped {
            report.drops += 1;
            report.rows.push(TickRow {
                frame: k,
                t: tick.secs(),
                perception_s: 0.0,
                generation_s: 0.0,
                io_s: 0.0,
                total_s: 0.0,
                dropped: true,
                lateness_s: secs(lateness),
                agent_speaking: scenario.agent_speaking_at(tick),
                user_vad: false,
                turn: pipeline.turn.mode.to_string(),
                commands: String::new(),
            });
            continue;
        }

        let t0 = Instant::now();
        let user_vad = pipeline.perceive(tick);
        let t1 = Instant::now();
        let out = pipeline.generate(k, tick, user_vad);
        let t2 = Instant::now();
        let sent = encode_frame_osc(&out.packet)
            .map_err(|e| e.to_string())
            .and_then(|bytes| sink.send(&out.packet, &bytes).map_err(|e| e.to_string()));
        let t3 = Instant::now();

        let stages = if clock.is_virtual() {
            scenario.latency_at(tick)
        } else {
            StageLatency {
                perception: t1 - t0,
                generation: t2 - t1,
                io: t3 - t2,
            }
        };
        busy_until = deadline + stages.total();

        for c in &out.commands {
            report.commands.push((tick, *c));
            if let Some(tx) = commands_out {
                let _ = tx.send((*c, None));
            }
        }
        report.rows.push(TickRow {
            frame: k,
            t: tick.secs(),
            perception_s: secs(stages.perception),
            generation_s: secs(stages.generation),
            io_s: secs(stages.io),
            total_s: secs(stages.total()),
            dropped: false,
            lateness_s: secs(lateness),
            agent_speaking: out.agent_speaking,
            user_vad: out.user_vad,
            turn: pipeline.turn.mode.to_string(),
            commands: out.commands.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
        });
        if let Err(e) = sent {
            log::error!("frame {k}: {e}");
            report.error = Some(format!("frame {k}: {e}"));
            break;
        }
        report.frames_emitted += 1;
    }
    report
}

impl TickRow {
    pub fn turn_mode(&self) -> Option<TurnMode> {
        [TurnMode::AgentTurn, TurnMode::UserTurn, TurnMode::Overlap, TurnMode::Silence]
            .into_iter()
            .find(|m| m.to_string() == self.turn)
    }
}
