//! Integer time base and clocks.
//!
//! Schedules are expressed in [`Tick`]s of one millisecond so that frame and
//! chunk boundaries are exact. Clocks report `Duration`s since their own
//! epoch; the virtual clock only moves when someone sleeps on it.

use std::fmt;
use std::ops::{Add, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub const TICKS_PER_SECOND: i64 = 1000;

/// Millisecond time stamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tick(pub i64);

impl Tick {
    pub const ZERO: Tick = Tick(0);

    /// Nearest tick to a time in seconds.
    pub fn from_secs(s: f64) -> Tick {
        Tick((s * TICKS_PER_SECOND as f64).round() as i64)
    }

    pub fn secs(self) -> f64 {
        self.0 as f64 / TICKS_PER_SECOND as f64
    }

    pub fn millis(self) -> i64 {
        self.0
    }

    pub fn as_duration(self) -> Duration {
        Duration::from_millis(self.0.max(0) as u64)
    }

    /// Tick at or before the given duration.
    pub fn floor_duration(d: Duration) -> Tick {
        Tick(d.as_millis() as i64)
    }

    /// Tick time of frame `k` at `fps`, rounded to the nearest millisecond.
    pub fn of_frame(k: u64, fps: f64) -> Tick {
        let exact = k as f64 * TICKS_PER_SECOND as f64 / fps;
        Tick(exact.round() as i64)
    }

    pub fn max(self, other: Tick) -> Tick {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for Tick {
    type Output = Tick;
    fn add(self, rhs: Tick) -> Tick {
        Tick(self.0 + rhs.0)
    }
}

impl Sub for Tick {
    type Output = Tick;
    fn sub(self, rhs: Tick) -> Tick {
        Tick(self.0 - rhs.0)
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:03}", abs / 1000, abs % 1000)
    }
}

/// Source of elapsed time for schedulers and tick loops.
pub trait Clock: Send + Sync {
    /// Time elapsed since the clock's epoch.
    fn now(&self) -> Duration;

    /// Block until `now() >= deadline`. Returns immediately for past deadlines.
    fn sleep_until(&self, deadline: Duration);

    /// True for clocks that only move when slept on.
    fn is_virtual(&self) -> bool {
        false
    }

    fn now_tick(&self) -> Tick {
        Tick::floor_duration(self.now())
    }
}

/// Deterministic clock that jumps straight to each requested deadline.
#[derive(Debug, Clone, Default)]
pub struct VirtualClock {
    nanos: Arc<AtomicU64>,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(start: Duration) -> Self {
        Self {
            nanos: Arc::new(AtomicU64::new(start.as_nanos() as u64)),
        }
    }

    pub fn advance(&self, by: Duration) {
        self.nanos.fetch_add(by.as_nanos() as u64, Ordering::AcqRel);
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::Acquire))
    }

    fn sleep_until(&self, deadline: Duration) {
        self.nanos
            .fetch_max(deadline.as_nanos() as u64, Ordering::AcqRel);
    }

    fn is_virtual(&self) -> bool {
        true
    }
}

/// Monotonic wall clock anchored at construction.
#[derive(Debug, Clone)]
pub struct WallClock {
    epoch: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        Self {
            epoch: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> Duration {
        self.epoch.elapsed()
    }

    fn sleep_until(&self, deadline: Duration) {
        let now = self.now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}
