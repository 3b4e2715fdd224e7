// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Worst-case delay of new sensor data across a mode transition.
//!
//! Relaxing transitions (periods grow) use the as-late-as-possible protocol,
//! whose delay is bounded by `max_δ Σ 2·max(p_old, p_new)`. Shrinking
//! transitions (periods shrink) use the as-early-as-possible protocol,
//! bounded per path by a forward recurrence over the path's tasks.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Path;
use crate::optimizer::ModeTable;
use crate::time::Nanos;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModeChangeError {
    #[error("task {task}: period shrinks in a relaxing transition")]
    NotRelaxing { task: usize },
    #[error("task {task}: period grows in a shrinking transition")]
    NotShrinking { task: usize },
    #[error("old and new configurations have {old} and {new} tasks")]
    DimensionMismatch { old: usize, new: usize },
    #[error("path is empty")]
    EmptyPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Towards a longer deadline.
    Relaxing,
    /// Towards a shorter deadline.
    Shrinking,
}

impl Direction {
    pub fn between(from_mode: usize, to_mode: usize) -> Direction {
        if to_mode > from_mode {
            Direction::Relaxing
        } else {
            Direction::Shrinking
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Relaxing => "relaxing",
            Direction::Shrinking => "shrinking",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionAnalysis {
    pub from_mode: usize,
    pub to_mode: usize,
    pub direction: Direction,
    pub worst_delay_ns: Nanos,
    /// Guaranteed deadline of the target mode.
    pub bound_ns: Nanos,
    /// `bound - worst_delay`; negative when the transition overshoots.
    pub margin_ns: i64,
}

fn same_len(old: &[Nanos], new: &[Nanos]) -> Result<(), ModeChangeError> {
    if old.len() != new.len() {
        return Err(ModeChangeError::DimensionMismatch { old: old.len(), new: new.len() });
    }
    Ok(())
}

/// `max_δ Σ_{i∈δ} 2·max(p_i^old, p_i^new)`.
pub fn alap_worst_delay(old: &[Nanos], new: &[Nanos], paths: &[Path]) -> Result<Nanos, ModeChangeError> {
    same_len(old, new)?;
    if let Some(task) = (0..old.len()).find(|&i| old[i] > new[i]) {
        return Err(ModeChangeError::NotRelaxing { task });
    }
    Ok(paths
        .iter()
        .map(|p| p.tasks().iter().map(|&i| 2 * old[i].max(new[i])).sum())
        .max()
        .unwrap_or(0))
}

/// Worst-case delay along one path when every task switches at its first
/// release after the trigger.
pub fn aeap_worst_delay(old: &[Nanos], new: &[Nanos], path: &Path) -> Result<Nanos, ModeChangeError> {
    same_len(old, new)?;
    if let Some(task) = (0..old.len()).find(|&i| old[i] < new[i]) {
        return Err(ModeChangeError::NotShrinking { task });
    }
    let (&first, rest) = path.tasks().split_first().ok_or(ModeChangeError::EmptyPath)?;
    let mut d = old[first] + new[first];
    for &i in rest {
        // A task still waiting out an old period hides the delay so far.
        d = if d > old[i] - new[i] { d + 2 * new[i] } else { old[i] + new[i] };
    }
    Ok(d)
}

/// [`aeap_worst_delay`] maximized over `paths`.
pub fn aeap_worst_delay_all(old: &[Nanos], new: &[Nanos], paths: &[Path]) -> Result<Nanos, ModeChangeError> {
    paths.iter().try_fold(0, |acc, p| Ok(acc.max(aeap_worst_delay(old, new, p)?)))
}

/// Worst delay of one ordered mode pair under its protocol.
pub fn analyze_transition(
    table: &ModeTable,
    paths: &[Path],
    from_mode: usize,
    to_mode: usize,
) -> Result<TransitionAnalysis, ModeChangeError> {
    let (old, new) = (&table.periods_ns[from_mode], &table.periods_ns[to_mode]);
    let direction = Direction::between(from_mode, to_mode);
    let worst_delay_ns = match direction {
        Direction::Relaxing => alap_worst_delay(old, new, paths)?,
        Direction::Shrinking => aeap_worst_delay_all(old, new, paths)?,
    };
    let bound_ns = table.mode_deadlines_ns[to_mode];
    Ok(TransitionAnalysis {
        from_mode,
        to_mode,
        direction,
        worst_delay_ns,
        bound_ns,
        margin_ns: bound_ns as i64 - worst_delay_ns as i64,
    })
}

/// All ordered pairs of distinct modes, row-major by source mode.
pub fn transition_matrix(table: &ModeTable, paths: &[Path]) -> Result<Vec<TransitionAnalysis>, ModeChangeError> {
    let m = table.mode_count();
    let mut out = Vec::with_capacity(m * m.saturating_sub(1));
    for from in 0..m {
        for to in (0..m).filter(|&to| to != from) {
            out.push(analyze_transition(table, paths, from, to)?);
        }
    }
    Ok(out)
}

/// Dense `m×m` lookup of worst delays; the diagonal holds the steady-state
/// path bound of each mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayMatrix {
    delays: Vec<Vec<Nanos>>,
}

impl DelayMatrix {
    pub fn new(table: &ModeTable, paths: &[Path]) -> Result<Self, ModeChangeError> {
        let m = table.mode_count();
        let mut delays = vec![vec![0; m]; m];
        for (j, row) in delays.iter_mut().enumerate() {
            let p = &table.periods_ns[j];
            row[j] = alap_worst_delay(p, p, paths)?;
        }
        for t in transition_matrix(table, paths)? {
            delays[t.from_mode][t.to_mode] = t.worst_delay_ns;
        }
        Ok(DelayMatrix { delays })
    }

    pub fn get(&self, from_mode: usize, to_mode: usize) -> Nanos {
        self.delays[from_mode][to_mode]
    }
}

pub const CSV_HEADER: &str = "from_mode,to_mode,direction,worst_delay_ns,bound_ns,margin_ns";

/// CSV rendering with 1-based mode numbers.
pub fn matrix_csv(entries: &[TransitionAnalysis]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for t in entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.from_mode + 1,
            t.to_mode + 1,
            t.direction,
            t.worst_delay_ns,
            t.bound_ns,
            t.margin_ns
        ));
    }
    out
}
