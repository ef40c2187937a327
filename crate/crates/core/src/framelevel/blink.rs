//! Automatic AU45 blinks.

use serde::Deserialize;

use crate::rng::SplitMix64;
use crate::time::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default)]
pub struct BlinkConfig {
    pub mean_interval_s: f64,
    pub close_s: f64,
    pub hold_s: f64,
    pub open_s: f64,
    pub seed: u64,
}

impl Default for BlinkConfig {
    fn default() -> Self {
        BlinkConfig {
            mean_interval_s: 4.0,
            close_s: 0.12,
            hold_s: 0.06,
            open_s: 0.15,
            seed: 0,
        }
    }
}

impl BlinkConfig {
    pub fn is_valid(&self) -> bool {
        [self.mean_interval_s, self.close_s, self.hold_s, self.open_s]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

/// One blink: closes over `[onset, closed)`, holds until `reopen`, opens
/// until `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blink {
    pub onset: Tick,
    pub closed: Tick,
    pub reopen: Tick,
    pub end: Tick,
}

impl Blink {
    fn knots(&self) -> [(Tick, f64); 4] {
        [
            (self.onset, 0.0),
            (self.closed, 1.0),
            (self.reopen, 1.0),
            (self.end, 0.0),
        ]
    }

    /// Piecewise-linear AU45 intensity; 0 outside `[onset, end]`.
    pub fn value_at(&self, t: Tick) -> f64 {
        if t < self.onset || t > self.end {
            return 0.0;
        }
        let k = self.knots();
        for w in k.windows(2) {
            let ((a, va), (b, vb)) = (w[0], w[1]);
            if t <= b {
                if b == a {
                    return vb;
                }
                let s = (t - a).millis() as f64 / (b - a).millis() as f64;
                return va + (vb - va) * s;
            }
        }
        0.0
    }
}

/// Blinks whose envelope fits completely inside `[0, horizon]`.
///
/// Inter-onset gaps are exponential with the configured mean, drawn from the
/// SplitMix64 stream keyed by `cfg.seed`. An onset that would land inside the
/// previous envelope is pushed to that envelope's end.
pub fn generate_blinks(cfg: &BlinkConfig, horizon_s: f64) -> Vec<Blink> {
    assert!(cfg.is_valid(), "blink durations must be positive");
    let horizon = Tick::from_secs(horizon_s);
    let close = Tick::from_secs(cfg.close_s);
    let hold = Tick::from_secs(cfg.hold_s);
    let open = Tick::from_secs(cfg.open_s);
    let mut rng = SplitMix64::new(cfg.seed);
    let mut out = Vec::new();
    let mut onset_s = 0.0;
    let mut prev_end = Tick::ZERO;
    loop {
        onset_s += rng.next_exponential(cfg.mean_interval_s);
        let onset = Tick::from_secs(onset_s).max(prev_end);
        onset_s = onset.secs();
        let blink = Blink {
            onset,
            closed: onset + close,
            reopen: onset + close + hold,
            end: onset + close + hold + open,
        };
        if blink.end > horizon {
            return out;
        }
        prev_end = blink.end;
        out.push(blink);
    }
}

/// Sorted blink list with point lookup.
#[derive(Debug, Clone, Default)]
pub struct BlinkSchedule {
    blinks: Vec<Blink>,
}

impl BlinkSchedule {
    pub fn new(cfg: &BlinkConfig, horizon_s: f64) -> Self {
        BlinkSchedule {
            blinks: generate_blinks(cfg, horizon_s),
        }
    }

    pub fn blinks(&self) -> &[Blink] {
        &self.blinks
    }

    /// The blink active at `t`, if any.
    pub fn active(&self, t: Tick) -> Option<&Blink> {
        let i = self.blinks.partition_point(|b| b.onset <= t);
        i.checked_sub(1)
            .map(|j| &self.blinks[j])
            .filter(|b| t <= b.end)
    }
}
