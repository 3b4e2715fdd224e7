// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Velocity-dependent end-to-end deadlines and their partition into modes.
//!
//! Mode indices are zero-based: mode `0` has the shortest deadline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{s_to_ns, Nanos};

#[derive(Debug, Error, PartialEq)]
pub enum DeadlineError {
    #[error("velocity must be non-negative, got {0} m/s")]
    NegativeVelocity(f64),
    #[error("invalid deadline range: d_min={d_min} ns, d_max={d_max} ns, modes={modes}")]
    InvalidRange { d_min: Nanos, d_max: Nanos, modes: usize },
    #[error("lambda and a_max must be positive (lambda={lambda}, a_max={a_max})")]
    InvalidPhysics { lambda: f64, a_max: f64 },
}

/// Time for a vehicle at velocity `v` (m/s) to travel `lambda` meters at
/// constant acceleration `a_max`, in seconds.
pub fn travel_time_s(v: f64, lambda: f64, a_max: f64) -> f64 {
    (-v + (v * v + 2.0 * lambda * a_max).sqrt()) / a_max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadlineMap {
    pub lambda_m: f64,
    pub a_max_mps2: f64,
    pub d_min_ns: Nanos,
    pub d_max_ns: Nanos,
    pub mode_deadlines: Vec<Nanos>,
}

impl DeadlineMap {
    pub fn new(
        lambda_m: f64,
        a_max_mps2: f64,
        d_min_ns: Nanos,
        d_max_ns: Nanos,
        modes: usize,
    ) -> Result<Self, DeadlineError> {
        if !(lambda_m > 0.0 && a_max_mps2 > 0.0) {
            return Err(DeadlineError::InvalidPhysics { lambda: lambda_m, a_max: a_max_mps2 });
        }
        let mode_deadlines = partition_modes(d_min_ns, d_max_ns, modes)?;
        Ok(DeadlineMap { lambda_m, a_max_mps2, d_min_ns, d_max_ns, mode_deadlines })
    }

    /// A map whose modes are given explicitly, e.g. copied from a mode table.
    pub fn with_modes(
        lambda_m: f64,
        a_max_mps2: f64,
        d_max_ns: Nanos,
        mode_deadlines: Vec<Nanos>,
    ) -> Result<Self, DeadlineError> {
        let invalid = || DeadlineError::InvalidRange {
            d_min: mode_deadlines.first().copied().unwrap_or(0),
            d_max: d_max_ns,
            modes: mode_deadlines.len(),
        };
        if !(lambda_m > 0.0 && a_max_mps2 > 0.0) {
            return Err(DeadlineError::InvalidPhysics { lambda: lambda_m, a_max: a_max_mps2 });
        }
        if mode_deadlines.is_empty()
            || mode_deadlines.windows(2).any(|w| w[0] >= w[1])
            || *mode_deadlines.last().unwrap() > d_max_ns
        {
            return Err(invalid());
        }
        Ok(DeadlineMap { lambda_m, a_max_mps2, d_min_ns: mode_deadlines[0], d_max_ns, mode_deadlines })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_deadlines.len()
    }

    pub fn deadline_from_velocity(&self, v: f64) -> Result<Nanos, DeadlineError> {
        deadline_from_velocity(v, self.lambda_m, self.a_max_mps2)
    }

    /// Largest mode whose guaranteed deadline does not exceed `d`; clamps to
    /// the first mode below the range.
    pub fn select_mode(&self, d: Nanos) -> usize {
        self.mode_deadlines.partition_point(|&dj| dj <= d).saturating_sub(1)
    }

    pub fn mode_for_velocity(&self, v: f64) -> Result<usize, DeadlineError> {
        Ok(self.select_mode(self.deadline_from_velocity(v)?))
    }
}

pub fn deadline_from_velocity(v: f64, lambda_m: f64, a_max_mps2: f64) -> Result<Nanos, DeadlineError> {
    if v < 0.0 || v.is_nan() {
        return Err(DeadlineError::NegativeVelocity(v));
    }
    Ok(s_to_ns(travel_time_s(v, lambda_m, a_max_mps2)))
}

/// Equal-length partition of `[d_min, d_max)` into `modes` ranges, each
/// represented by its lower bound.
pub fn partition_modes(d_min: Nanos, d_max: Nanos, modes: usize) -> Result<Vec<Nanos>, DeadlineError> {
    if modes == 0 || d_min >= d_max || ((d_max - d_min) as u128) < modes as u128 {
        return Err(DeadlineError::InvalidRange { d_min, d_max, modes });
    }
    let span = (d_max - d_min) as u128;
    Ok((0..modes as u128)
        .map(|j| d_min + (j * span / modes as u128) as Nanos)
        .collect())
}
