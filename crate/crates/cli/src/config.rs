//! Optional TOML defaults. Command-line flags take precedence.

use std::path::{Path, PathBuf};

use anyhow::Context;
use bmlrt::framelevel::FrameLevelConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub fps: Option<f64>,
    pub chunk: Option<f64>,
    pub word: Option<f64>,
    pub seed: Option<u64>,
    pub lexicon: Option<PathBuf>,
    pub rest_transition: Option<f64>,
    pub resume_replay_last: Option<bool>,
    pub framelevel: Option<FrameLevelConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: FileConfig = toml::from_str(text)?;
        for (name, v) in [("fps", cfg.fps), ("chunk", cfg.chunk), ("word", cfg.word)] {
            if let Some(v) = v {
                anyhow::ensure!(v > 0.0 && v.is_finite(), "`{name}` must be positive, got {v}");
            }
        }
        if let Some(v) = cfg.rest_transition {
            anyhow::ensure!(v >= 0.0 && v.is_finite(), "`rest_transition` must be non-negative, got {v}");
        }
        if let Some(f) = &cfg.framelevel {
            anyhow::ensure!(f.fps > 0.0 && f.fps.is_finite(), "`framelevel.fps` must be positive");
            anyhow::ensure!(f.blink.is_valid(), "`framelevel.blink` durations must be positive");
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_config_parses() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/bmlrt.toml")).unwrap();
        let cfg = FileConfig::parse(&text).unwrap();
        assert_eq!(cfg.chunk, Some(0.5));
        assert!(cfg.framelevel.unwrap().enable.blinks);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(FileConfig::parse("speed = 3").is_err());
        assert!(FileConfig::parse("fps = 0").is_err());
        assert!(FileConfig::parse("[framelevel.blink]\nclose_s = -1").is_err());
    }
}
