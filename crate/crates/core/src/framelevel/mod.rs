//! Frame-level realization: a fixed-rate loop that merges per-frame inputs
//! (speech-driven mouth, external streams, automatic blinks) and ships each
//! frame as an OSC bundle.

mod blink;
mod merge;
mod osc;
mod packet;
mod tickloop;

use serde::Deserialize;

pub use blink::{generate_blinks, Blink, BlinkConfig, BlinkSchedule};
pub use merge::{
    merge_channels, BlinkSource, ChannelToggles, FrameSource, Mailbox, MailboxSource,
    ScriptedSource, SourceKind, SourcePriority,
};
pub use osc::{
    apply_message, decode_frame_osc, decode_frame_osc_at, decode_message, encode_frame_osc,
    encode_message, encode_standalone, frame_messages, tick_of_timetag, timetag_of, OscArg,
    OscError, OscMessage,
};
pub use packet::{read_frame_stream, write_frame_stream, FramePacket, FrameRecord};
pub use tickloop::{
    merge_tick, tick_loop, FrameSink, NullSink, Pacer, StreamSink, TeeSink, TickLoopReport, TickStat,
    UdpSink, VecSink,
};

/// Settings read from the `[framelevel]` config section; see
/// `docs/framelevel.md`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct FrameLevelConfig {
    pub fps: f64,
    pub enable: ChannelToggles,
    pub blink: BlinkConfig,
    #[serde(skip)]
    pub priority: SourcePriority,
}

impl Default for FrameLevelConfig {
    fn default() -> Self {
        FrameLevelConfig {
            fps: 25.0,
            enable: ChannelToggles::default(),
            blink: BlinkConfig::default(),
            priority: SourcePriority::default(),
        }
    }
}

impl FrameLevelConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let cfg = FrameLevelConfig::from_toml("fps = 30.0\n[enable]\nblinks = false\n[blink]\nseed = 5\n").unwrap();
        assert_eq!(cfg.fps, 30.0);
        assert!(!cfg.enable.blinks);
        assert!(cfg.enable.au);
        assert_eq!(cfg.blink.seed, 5);
        assert_eq!(cfg.blink.mean_interval_s, 4.0);
        assert_eq!(FrameLevelConfig::from_toml("").unwrap(), FrameLevelConfig::default());
    }
}
