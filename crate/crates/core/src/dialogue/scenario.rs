//! Scripted interaction scenarios.
//!
//! One directive per line, `#` starts a comment. Times are seconds and
//! intervals are half-open `[from, to)`. See `docs/scenario.md`.

use std::collections::BTreeMap;
use std::time::Duration;

use thiserror::Error;

use super::features::{FeatureSample, StreamKind, VadConfig};
use super::turn::TurnConfig;
use crate::framelevel::{BlinkConfig, ChannelToggles};
use crate::realizer::ChannelId;
use crate::time::Tick;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("scenario line {line}: {msg}")]
pub struct ScenarioError {
    pub line: usize,
    pub msg: String,
}

/// Per-tick processing time of each pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageLatency {
    pub perception: Duration,
    pub generation: Duration,
    pub io: Duration,
}

impl StageLatency {
    pub fn total(&self) -> Duration {
        self.perception + self.generation + self.io
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpan {
    pub from: Tick,
    pub to: Tick,
    pub channel: ChannelId,
    pub value: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub fps: f64,
    pub duration_s: Option<f64>,
    /// Stage latencies in force from each tick on, sorted.
    pub latency: Vec<(Tick, StageLatency)>,
    pub agent_speaking: Vec<(Tick, Tick)>,
    /// Scripted voice activity; when absent it is detected from audio samples.
    pub user_vad: Option<Vec<(Tick, Tick)>>,
    pub samples: Vec<FeatureSample>,
    pub external: Vec<ExternalSpan>,
    pub vad: VadConfig,
    pub turn: TurnConfig,
    pub enable: ChannelToggles,
    pub blink: BlinkConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            fps: 25.0,
            duration_s: None,
            latency: Vec::new(),
            agent_speaking: Vec::new(),
            user_vad: None,
            samples: Vec::new(),
            external: Vec::new(),
            vad: VadConfig::default(),
            turn: TurnConfig::default(),
            enable: ChannelToggles::default(),
            blink: BlinkConfig::default(),
        }
    }
}

fn in_spans(spans: &[(Tick, Tick)], t: Tick) -> bool {
    spans.iter().any(|&(a, b)| a <= t && t < b)
}

impl Scenario {
    pub fn latency_at(&self, t: Tick) -> StageLatency {
        self.latency
            .iter()
            .rev()
            .find(|(from, _)| *from <= t)
            .map(|(_, l)| *l)
            .unwrap_or_default()
    }

    pub fn agent_speaking_at(&self, t: Tick) -> bool {
        in_spans(&self.agent_speaking, t)
    }

    pub fn scripted_vad_at(&self, t: Tick) -> Option<bool> {
        self.user_vad.as_ref().map(|s| in_spans(s, t))
    }

    pub fn stream(&self, kind: StreamKind) -> Vec<FeatureSample> {
        let mut v: Vec<_> = self.samples.iter().filter(|s| s.kind == kind).cloned().collect();
        v.sort_by(|a, b| a.ts.total_cmp(&b.ts));
        v
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        Self::parse_with(text, Scenario::default())
    }

    /// Parse on top of `base`; directives in the text win.
    pub fn parse_with(text: &str, base: Scenario) -> Result<Scenario, ScenarioError> {
        let mut sc = base;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ScenarioError { line: n + 1, msg };
            let words: Vec<&str> = line.split_whitespace().collect();
            let (key, args) = (words[0], &words[1..]);
            let num = |s: &str| -> Result<f64, ScenarioError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0)
                    .ok_or_else(|| err(format!("expected a non-negative number, got `{s}`")))
            };
            let arity = |k: usize| -> Result<(), ScenarioError> {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(err(format!("`{key}` takes {k} argument(s)")))
                }
            };
            let span = || -> Result<(Tick, Tick), ScenarioError> {
                let (a, b) = (num(args[0])?, num(args[1])?);
                if b < a {
                    return Err(err(format!("interval end {b} before start {a}")));
                }
                Ok((Tick::from_secs(a), Tick::from_secs(b)))
            };
            match key {
                "fps" => {
                    arity(1)?;
                    sc.fps = num(args[0])?;
                    if sc.fps == 0.0 {
                        return Err(err("fps must be positive".into()));
                    }
                    sc.turn.fps = sc.fps;
                }
                "duration" => {
                    arity(1)?;
                    sc.duration_s = Some(num(args[0])?);
                }
                "latency" | "latency_at" => {
                    let (at, pairs) = if key == "latency" {
                        (Tick::ZERO, args)
                    } else {
                        if args.is_empty() {
                            return Err(err("`latency_at` needs a time".into()));
                        }
                        (Tick::from_secs(num(args[0])?), &args[1..])
                    };
                    let mut l = sc.latency_at(at);
                    for p in pairs.iter() {
                        let (k, v) = p.split_once('=').ok_or_else(|| err(format!("expected stage=seconds, got `{p}`")))?;
                        let d = Duration::from_micros((num(v)? * 1e6).round() as u64);
                        match k {
                            "perception" => l.perception = d,
                            "generation" => l.generation = d,
                            "io" => l.io = d,
                            _ => return Err(err(format!("unknown stage `{k}`"))),
                        }
                    }
                    sc.latency.retain(|(t, _)| *t != at);
                    sc.latency.push((at, l));
                    sc.latency.sort_by_key(|(t, _)| *t);
                }
                "agent_speaking" => {
                    arity(2)?;
                    sc.agent_speaking.push(span()?);
                }
                "user_vad" => {
                    arity(2)?;
                    let s = span()?;
                    sc.user_vad.get_or_insert_with(Vec::new).push(s);
                }
                "sample" => {
                    if args.len() < 2 {
                        return Err(err("`sample` needs a time and a stream kind".into()));
                    }
                    let ts = num(args[0])?;
                    let kind: StreamKind = args[1].parse().map_err(err)?;
                    let mut values = BTreeMap::new();
                    for p in &args[2..] {
                        let (k, v) = p.split_once('=').ok_or_else(|| err(format!("expected name=value, got `{p}`")))?;
                        let v: f64 = v.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| err(format!("bad value `{v}`")))?;
                        values.insert(k.to_string(), v);
                    }
                    if let Some(prev) = sc.samples.iter().rev().find(|s| s.kind == kind) {
                        if prev.ts > ts {
                            return Err(err(format!("{kind} samples must be in time order")));
                        }
                    }
                    sc.samples.push(FeatureSample { ts, kind, values });
                }
                "external" => {
                    if args.len() < 3 {
                        return Err(err("`external` needs from, to and at least one channel=value".into()));
                    }
                    let (from, to) = span()?;
                    for p in &args[2..] {
                        let (k, v) = p.split_once('=').ok_or_else(|| err(format!("expected channel=value, got `{p}`")))?;
                        let channel: ChannelId = k.parse().map_err(err)?;
                        let value: f32 = v.parse().ok().filter(|v: &f32| v.is_finite()).ok_or_else(|| err(format!("bad value `{v}`")))?;
                        sc.external.push(ExternalSpan { from, to, channel, value });
                    }
                }
                "vad_floor" => {
                    arity(1)?;
                    sc.vad.loudness_floor = num(args[0])?;
                }
                "voicing_threshold" => {
                    arity(1)?;
                    sc.vad.voicing_threshold = num(args[0])?;
                }
                "barge_in_ticks" => {
                    arity(1)?;
                    sc.turn.barge_in_ticks = args[0].parse().map_err(|_| err(format!("bad tick count `{}`", args[0])))?;
                }
                "silence_timeout" => {
                    arity(1)?;
                    sc.turn.silence_timeout_s = num(args[0])?;
                }
                "blink_seed" => {
                    arity(1)?;
                    sc.blink.seed = args[0].parse().map_err(|_| err(format!("bad seed `{}`", args[0])))?;
                }
                "blinks" => {
                    arity(1)?;
                    sc.enable.blinks = match args[0] {
                        "on" => true,
                        "off" => false,
                        other => return Err(err(format!("expected on/off, got `{other}`"))),
                    };
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_directives() {
        let sc = Scenario::parse(
            "# budget\nfps 25\nduration 10\nlatency perception=0.030 generation=0.008 io=0.002\n\
             latency_at 5 generation=0.050\nagent_speaking 0 4\nuser_vad 3 5\n\
             sample 0.01 audio voicing_prob=0.9 loudness=0.4\nexternal 1 2 AU12=0.6 VISEME:open=0.3\n\
             vad_floor 0.2\nbarge_in_ticks 6\nsilence_timeout 2\nblink_seed 9\nblinks off\n",
        )
        .unwrap();
        assert_eq!(sc.duration_s, Some(10.0));
        assert_eq!(sc.latency_at(Tick(0)).total(), Duration::from_micros(40_000));
        let late = sc.latency_at(Tick(6000));
        assert_eq!(late.generation, Duration::from_millis(50));
        assert_eq!(late.perception, Duration::from_millis(30));
        assert!(sc.agent_speaking_at(Tick(3999)) && !sc.agent_speaking_at(Tick(4000)));
        assert_eq!(sc.scripted_vad_at(Tick(3000)), Some(true));
        assert_eq!(sc.external.len(), 2);
        assert_eq!(sc.turn.barge_in_ticks, 6);
        assert!(!sc.enable.blinks);
        assert_eq!(sc.blink.seed, 9);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Scenario::parse("fps 25\nlatency warp=1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(Scenario::parse("agent_speaking 3 1").is_err());
        assert!(Scenario::parse("sample 1 audio x=1\nsample 0.5 audio x=1").is_err());
        assert!(Scenario::parse("teleport 1").is_err());
        assert!(Scenario::parse("fps 0").is_err());
    }

    #[test]
    fn empty_text_is_default() {
        assert_eq!(Scenario::parse("").unwrap(), Scenario::default());
    }
}
