//! Locally-optimal non-adaptive schedules.
//!
//! Each step appends the integer time that minimizes the expected variance of
//! the extended schedule, averaging over every outcome string of the whole
//! schedule. The search range starts at `max(8, 2·max(prefix))` and is widened
//! by half until the minimizer stays put.
//!
//! Because the expected variance ignores measurement order, a schedule is
//! reported in ascending order; the order in which the greedy search picked
//! the times is kept alongside it. For ten steps the picks are
//! `1, 1, 2, 1, 3, 1, 2, 4, 1, 6`, reported as `1, 1, 1, 1, 1, 2, 2, 3, 4, 6`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Schedule;
use crate::objective::{next_time_scores, DEFAULT_ENUMERATION_CAP};

/// Scores within this relative distance count as tied; ties go to the
/// smaller time.
const TIE_TOLERANCE: f64 = 1e-12;

const MIN_SEARCH_BOUND: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LonaTrace {
    /// Ascending times.
    pub schedule: Vec<u32>,
    /// Times in the order the greedy search chose them.
    pub selection_order: Vec<u32>,
    /// `E[V]` after each step.
    pub per_step_ev: Vec<f64>,
    pub search_bound_used: Vec<u32>,
}

impl LonaTrace {
    pub fn to_schedule(&self) -> Schedule {
        Schedule::from_integers(&self.schedule)
    }
}

/// Best next time in `1..=m_max` after `prefix` and the resulting `E[V]`.
pub fn best_next_time(prefix: &[u32], m_max: u32) -> Result<(u32, f64)> {
    best_next_time_capped(prefix, m_max, DEFAULT_ENUMERATION_CAP)
}

pub fn best_next_time_capped(prefix: &[u32], m_max: u32, cap: usize) -> Result<(u32, f64)> {
    if m_max == 0 {
        return Err(Error::Domain("search bound must be at least 1".into()));
    }
    if prefix.contains(&0) {
        return Err(Error::NonInteger(0.0));
    }
    let candidates: Vec<u32> = (1..=m_max).collect();
    let scores = next_time_scores(&Schedule::from_integers(prefix), &candidates, cap)?;
    Ok(argmin(&candidates, &scores))
}

fn argmin(candidates: &[u32], scores: &[f64]) -> (u32, f64) {
    let mut best = (candidates[0], scores[0]);
    for (&m, &ev) in candidates.iter().zip(scores).skip(1) {
        if ev < best.1 - TIE_TOLERANCE * best.1.abs() {
            best = (m, ev);
        }
    }
    best
}

pub fn lona_schedule(n: usize) -> Result<LonaTrace> {
    lona_schedule_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn lona_schedule_capped(n: usize, cap: usize) -> Result<LonaTrace> {
    if n == 0 {
        return Err(Error::Domain("schedule length must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::EnumerationCap { len: n, cap });
    }
    let mut picks = Vec::with_capacity(n);
    let mut per_step_ev = Vec::with_capacity(n);
    let mut search_bound_used = Vec::with_capacity(n);
    for _ in 0..n {
        let prefix_max = picks.iter().copied().max().unwrap_or(0);
        let mut bound = MIN_SEARCH_BOUND.max(2 * prefix_max);
        let mut best = best_next_time_capped(&picks, bound, cap)?;
        loop {
            let wider = bound + bound.div_ceil(2);
            let check = best_next_time_capped(&picks, wider, cap)?;
            bound = wider;
            if check.0 == best.0 {
                break;
            }
            best = check;
        }
        picks.push(best.0);
        per_step_ev.push(best.1);
        search_bound_used.push(bound);
    }
    let mut schedule = picks.clone();
    schedule.sort_unstable();
    Ok(LonaTrace { schedule, selection_order: picks, per_step_ev, search_bound_used })
}
