//! Perception feature streams and their alignment to the tick grid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::time::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StreamKind {
    /// Nominally 30 fps.
    Video,
    /// Nominally 100 Hz.
    Audio,
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Video => "video",
            StreamKind::Audio => "audio",
        })
    }
}

impl FromStr for StreamKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "video" => Ok(StreamKind::Video),
            "audio" => Ok(StreamKind::Audio),
            _ => Err(format!("unknown stream kind `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSample {
    pub ts: f64,
    pub kind: StreamKind,
    pub values: BTreeMap<String, f64>,
}

impl FeatureSample {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

/// For each tick, the latest sample with `ts <= t`, or `None` before the
/// first sample. `stream` must be sorted by `ts`.
pub fn resample_features<'a>(stream: &'a [FeatureSample], ticks: &[Tick]) -> Vec<Option<&'a FeatureSample>> {
    debug_assert!(stream.windows(2).all(|w| w[0].ts <= w[1].ts));
    ticks
        .iter()
        .map(|t| {
            let n = stream.partition_point(|s| s.ts <= t.secs());
            n.checked_sub(1).map(|i| &stream[i])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadConfig {
    pub voicing_threshold: f64,
    pub loudness_floor: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        VadConfig {
            voicing_threshold: 0.5,
            loudness_floor: 0.1,
        }
    }
}

/// Voiced when `voicing_prob >= threshold` and `loudness >= floor`.
/// Missing features count as silence.
pub fn detect_voice(sample: Option<&FeatureSample>, cfg: &VadConfig) -> bool {
    let Some(s) = sample else { return false };
    match (s.get("voicing_prob"), s.get("loudness")) {
        (Some(v), Some(l)) => v >= cfg.voicing_threshold && l >= cfg.loudness_floor,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(kind: StreamKind, rate: f64, n: usize) -> Vec<FeatureSample> {
        (0..n)
            .map(|i| FeatureSample {
                ts: i as f64 / rate,
                kind,
                values: BTreeMap::from([("i".to_string(), i as f64)]),
            })
            .collect()
    }

    #[test]
    fn audio_hits_tick_exactly() {
        let s = stream(StreamKind::Audio, 100.0, 10);
        let out = resample_features(&s, &[Tick(40)]);
        assert_eq!(out[0].unwrap().get("i"), Some(4.0));
    }

    #[test]
    fn video_is_held() {
        let s = stream(StreamKind::Video, 30.0, 10);
        let out = resample_features(&s, &[Tick(40)]);
        assert_eq!(out[0].unwrap().ts, 1.0 / 30.0);
    }

    #[test]
    fn before_first_sample_is_absent() {
        let mut s = stream(StreamKind::Audio, 100.0, 3);
        s.iter_mut().for_each(|x| x.ts += 0.5);
        assert_eq!(resample_features(&s, &[Tick(0), Tick(480)]), vec![None, None]);
    }

    #[test]
    fn vad_rule() {
        let cfg = VadConfig::default();
        let mk = |v, l| FeatureSample {
            ts: 0.0,
            kind: StreamKind::Audio,
            values: BTreeMap::from([("voicing_prob".into(), v), ("loudness".into(), l)]),
        };
        assert!(detect_voice(Some(&mk(0.5, 0.1)), &cfg));
        assert!(!detect_voice(Some(&mk(0.49, 0.9)), &cfg));
        assert!(!detect_voice(Some(&mk(0.9, 0.05)), &cfg));
        assert!(!detect_voice(None, &cfg));
    }
}
