//! Turn-taking and the closed interaction loop: synthetic perception
//! streams are aligned to the 25 Hz tick, speaking states drive a small
//! state machine, and each tick ends in a frame-level output packet.

mod features;
mod harness;
mod scenario;
mod turn;

pub use features::{detect_voice, resample_features, FeatureSample, StreamKind, VadConfig};
pub use harness::{run_interaction_loop, tick_count, LoopReport, TickRow};
pub use scenario::{ExternalSpan, Scenario, ScenarioError, StageLatency};
pub use turn::{update_turn_state, TurnConfig, TurnMode, TurnState};
