//! Same-modality conflict resolution.
//!
//! Signals on exclusive modalities are ranked by priority (higher first),
//! then by later start, then by larger id. Walking that ranking, each signal
//! keeps the earliest stretch of its span not already claimed by a
//! higher-ranked signal. A loser that began before its winner is therefore cut
//! at the winner's start; one that began inside the winner resumes at the
//! winner's end; one with no free stretch is dropped. Face and speech signals
//! pass through untouched.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::markup::{Modality, Signal, SyncPoint};

/// Ranking used for exclusive modalities; `Less` means `a` wins.
pub fn rank(a: &Signal, b: &Signal) -> Ordering {
    b.priority
        .cmp(&a.priority)
        .then_with(|| b.start().total_cmp(&a.start()))
        .then_with(|| b.id.cmp(&a.id))
}

/// Earliest free stretch of `[start, end)` given claimed intervals.
fn first_free(start: f64, end: f64, claimed: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut cursor = start;
    'scan: loop {
        if cursor >= end {
            return None;
        }
        for &(a, b) in claimed {
            if a <= cursor && cursor < b {
                cursor = b;
                continue 'scan;
            }
        }
        let stop = claimed
            .iter()
            .filter(|(a, _)| *a > cursor)
            .map(|(a, _)| *a)
            .fold(end, f64::min);
        return Some((cursor, stop));
    }
}

/// Survivors in input order, truncated where needed.
pub fn resolve_conflicts(signals: &[Signal]) -> Vec<Signal> {
    let mut order: Vec<usize> = (0..signals.len())
        .filter(|&i| signals[i].modality.is_exclusive())
        .collect();
    order.sort_by(|&a, &b| rank(&signals[a], &signals[b]));

    let mut claimed: BTreeMap<Modality, Vec<(f64, f64)>> = BTreeMap::new();
    let mut outcome: Vec<Option<Signal>> = signals.iter().cloned().map(Some).collect();

    for i in order {
        let s = &signals[i];
        let (start, end) = (s.start(), s.end());
        if start >= end {
            // empty spans occupy nothing
            continue;
        }
        let taken = claimed.entry(s.modality).or_default();
        match first_free(start, end, taken) {
            None => outcome[i] = None,
            Some((a, b)) => {
                taken.push((a, b));
                if (a, b) != (start, end) {
                    outcome[i] = Some(truncate(s, a, b));
                }
            }
        }
    }
    outcome.into_iter().flatten().collect()
}

fn truncate(s: &Signal, start: f64, end: f64) -> Signal {
    let mut out = s.clone();
    for (point, t) in out.sync.iter_mut() {
        *t = match point {
            SyncPoint::Start => start,
            SyncPoint::End => end,
            _ => t.clamp(start, end),
        };
    }
    out
}
