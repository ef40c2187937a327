//! Rule-based turn-taking over the agent's and the user's speaking states.

use std::fmt;

use crate::incremental::ControlCommand;
use crate::time::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnMode {
    AgentTurn,
    UserTurn,
    Overlap,
    Silence,
}

impl fmt::Display for TurnMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TurnMode::AgentTurn => "AGENT_TURN",
            TurnMode::UserTurn => "USER_TURN",
            TurnMode::Overlap => "OVERLAP",
            TurnMode::Silence => "SILENCE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnConfig {
    /// Overlap must last this many ticks before the user takes the turn.
    pub barge_in_ticks: u32,
    pub silence_timeout_s: f64,
    pub fps: f64,
}

impl Default for TurnConfig {
    fn default() -> Self {
        TurnConfig {
            barge_in_ticks: 5,
            silence_timeout_s: 1.5,
            fps: 25.0,
        }
    }
}

impl TurnConfig {
    fn barge_in_span(&self) -> Tick {
        Tick::of_frame(self.barge_in_ticks as u64, self.fps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnState {
    pub mode: TurnMode,
    /// When `mode` was entered.
    pub since: Tick,
    /// Start of the current both-speaking stretch.
    overlap_onset: Option<Tick>,
    /// Start of the current silence, if the user held the turn before it.
    silence_after_user: Option<Tick>,
}

impl Default for TurnState {
    fn default() -> Self {
        TurnState {
            mode: TurnMode::Silence,
            since: Tick::ZERO,
            overlap_onset: None,
            silence_after_user: None,
        }
    }
}

impl TurnState {
    pub fn since_s(&self, now: Tick) -> f64 {
        (now - self.since).secs()
    }
}

/// One step of the turn-taking rules:
///
/// * both speaking for `barge_in_ticks` → INTERRUPT, user takes the turn;
///   shorter overlaps are OVERLAP with no command;
/// * silence lasting `silence_timeout_s` after the user's turn → RESUME,
///   agent takes the turn;
/// * otherwise silence is SILENCE and a single speaker holds the turn.
pub fn update_turn_state(
    state: &TurnState,
    agent_speaking: bool,
    user_vad: bool,
    tick: Tick,
    cfg: &TurnConfig,
) -> (TurnState, Vec<ControlCommand>) {
    let mut next = *state;
    let mut commands = Vec::new();
    let mode = match (agent_speaking, user_vad) {
        (true, true) => {
            next.silence_after_user = None;
            let onset = *next.overlap_onset.get_or_insert(tick);
            if state.mode == TurnMode::UserTurn {
                TurnMode::UserTurn
            } else if tick - onset >= cfg.barge_in_span() {
                commands.push(ControlCommand::Interrupt);
                TurnMode::UserTurn
            } else {
                TurnMode::Overlap
            }
        }
        (true, false) => {
            next.overlap_onset = None;
            next.silence_after_user = None;
            TurnMode::AgentTurn
        }
        (false, true) => {
            next.overlap_onset = None;
            next.silence_after_user = None;
            TurnMode::UserTurn
        }
        (false, false) => {
            next.overlap_onset = None;
            if state.mode == TurnMode::UserTurn {
                next.silence_after_user = Some(tick);
            }
            match next.silence_after_user {
                Some(onset) if tick - onset >= Tick::from_secs(cfg.silence_timeout_s) => {
                    next.silence_after_user = None;
                    commands.push(ControlCommand::Resume);
                    TurnMode::AgentTurn
                }
                _ => TurnMode::Silence,
            }
        }
    };
    if mode != state.mode {
        next.since = tick;
    }
    next.mode = mode;
    (next, commands)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(inputs: impl Fn(Tick) -> (bool, bool), frames: u64) -> Vec<(Tick, TurnMode, Vec<ControlCommand>)> {
        let cfg = TurnConfig::default();
        let mut s = TurnState::default();
        (0..frames)
            .map(|k| {
                let t = Tick::of_frame(k, 25.0);
                let (a, u) = inputs(t);
                let (n, cmds) = update_turn_state(&s, a, u, t, &cfg);
                s = n;
                (t, s.mode, cmds)
            })
            .collect()
    }

    #[test]
    fn barge_in_fires_at_onset_plus_five_ticks() {
        let log = drive(|t| (true, t >= Tick(3000)), 150);
        let fired: Vec<_> = log.iter().filter(|(_, _, c)| !c.is_empty()).collect();
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].0, Tick(3200));
        assert_eq!(fired[0].2, vec![ControlCommand::Interrupt]);
        assert_eq!(log[79].1, TurnMode::Overlap);
    }

    #[test]
    fn short_blip_is_overlap_only() {
        let log = drive(|t| (true, t == Tick(1000) || t == Tick(1040)), 50);
        assert!(log.iter().all(|(_, _, c)| c.is_empty()));
        assert_eq!(log[25].1, TurnMode::Overlap);
        assert_eq!(log[27].1, TurnMode::AgentTurn);
    }

    #[test]
    fn all_silent_stays_silent() {
        let log = drive(|_| (false, false), 500);
        assert!(log.iter().all(|(_, m, c)| *m == TurnMode::Silence && c.is_empty()));
    }

    #[test]
    fn silence_after_user_resumes_agent() {
        let log = drive(|t| (false, t < Tick(1000)), 100);
        let fired: Vec<_> = log.iter().filter(|(_, _, c)| !c.is_empty()).collect();
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].0, Tick(2520), "first tick at or after 1.0 + 1.5 s");
        assert_eq!(fired[0].2, vec![ControlCommand::Resume]);
        assert_eq!(fired[0].1, TurnMode::AgentTurn);
    }

    #[test]
    fn every_mode_and_input_has_a_successor() {
        for mode in [TurnMode::AgentTurn, TurnMode::UserTurn, TurnMode::Overlap, TurnMode::Silence] {
            for (a, u) in [(false, false), (false, true), (true, false), (true, true)] {
                let s = TurnState { mode, ..Default::default() };
                let (n, _) = update_turn_state(&s, a, u, Tick(40), &TurnConfig::default());
                let expect_single = match (a, u) {
                    (true, false) => Some(TurnMode::AgentTurn),
                    (false, true) => Some(TurnMode::UserTurn),
                    _ => None,
                };
                if let Some(m) = expect_single {
                    assert_eq!(n.mode, m);
                }
            }
        }
    }
}
