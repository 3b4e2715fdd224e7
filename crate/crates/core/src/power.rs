// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Utilization and the `P(s) = β + α·s^γ` power model.
//!
//! Powers come out in the unit of `alpha`/`beta` (milliwatts for the
//! bundled parameters). Times are converted from nanoseconds only here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::TaskGraph;
use crate::time::Nanos;

const SPEED_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PowerError {
    #[error("configuration has {got} entries, task graph has {expected} tasks")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("speed factor {speed} outside [{s_min}, 1]")]
    InvalidSpeed { speed: f64, s_min: f64 },
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("utilization {0} exceeds 1")]
    Overutilized(f64),
    #[error("invalid power parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    #[serde(rename = "alpha_mw")]
    pub alpha: f64,
    #[serde(rename = "beta_mw")]
    pub beta: f64,
    pub gamma: f64,
    pub s_min: f64,
}

impl PowerParams {
    /// Fitted constants for the reference hardware, with `s_min` taken from
    /// the lowest of twelve evenly spaced levels between 345 MHz and 2 GHz.
    pub fn reference() -> Self {
        PowerParams { alpha: 842.04, beta: 232.81, gamma: 2.64, s_min: 345.0 / 2000.0 }
    }

    pub fn validate(&self) -> Result<(), PowerError> {
        if !(self.alpha > 0.0) {
            return Err(PowerError::InvalidParams(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0) {
            return Err(PowerError::InvalidParams(format!("beta must be non-negative, got {}", self.beta)));
        }
        if !(2.0..=3.0).contains(&self.gamma) {
            return Err(PowerError::InvalidParams(format!("gamma must lie in [2, 3], got {}", self.gamma)));
        }
        if !(self.s_min > 0.0 && self.s_min <= 1.0) {
            return Err(PowerError::InvalidParams(format!("s_min must lie in (0, 1], got {}", self.s_min)));
        }
        Ok(())
    }

    /// Instantaneous power at speed `s`.
    pub fn power_at(&self, s: f64) -> f64 {
        self.beta + self.alpha * s.powf(self.gamma)
    }

    pub fn idle_power(&self) -> f64 {
        self.power_at(self.s_min)
    }

    fn check_speed(&self, s: f64) -> Result<(), PowerError> {
        if s < self.s_min - SPEED_EPS || s > 1.0 + SPEED_EPS || s.is_nan() {
            return Err(PowerError::InvalidSpeed { speed: s, s_min: self.s_min });
        }
        Ok(())
    }
}

/// Per-task periods and speed factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub periods_ns: Vec<Nanos>,
    pub speeds: Vec<f64>,
}

impl SystemConfig {
    pub fn len(&self) -> usize {
        self.periods_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods_ns.is_empty()
    }

    fn check(&self, graph: &TaskGraph) -> Result<(), PowerError> {
        let n = graph.len();
        if self.periods_ns.len() != n {
            return Err(PowerError::DimensionMismatch { expected: n, got: self.periods_ns.len() });
        }
        if self.speeds.len() != n {
            return Err(PowerError::DimensionMismatch { expected: n, got: self.speeds.len() });
        }
        if self.periods_ns.contains(&0) {
            return Err(PowerError::ZeroPeriod);
        }
        Ok(())
    }
}

/// `U = Σ e_i / (p_i s_i)`.
pub fn utilization(config: &SystemConfig, graph: &TaskGraph) -> Result<f64, PowerError> {
    config.check(graph)?;
    Ok((0..graph.len())
        .map(|i| graph.wcet_ns(i) as f64 / (config.periods_ns[i] as f64 * config.speeds[i]))
        .sum())
}

/// Average power of one task: `α s^(γ-1) e / p`.
pub fn task_avg_power(e: Nanos, p: Nanos, s: f64, params: &PowerParams) -> Result<f64, PowerError> {
    if p == 0 {
        return Err(PowerError::ZeroPeriod);
    }
    params.check_speed(s)?;
    Ok(params.alpha * s.powf(params.gamma - 1.0) * e as f64 / p as f64)
}

/// `β + α Σ s_i^(γ-1) e_i/p_i + α s_min^γ (1 - U)`.
pub fn system_avg_power(config: &SystemConfig, graph: &TaskGraph, params: &PowerParams) -> Result<f64, PowerError> {
    let u = utilization(config, graph)?;
    if u > 1.0 + 1e-12 {
        return Err(PowerError::Overutilized(u));
    }
    let mut dynamic = 0.0;
    for i in 0..graph.len() {
        dynamic += task_avg_power(graph.wcet_ns(i), config.periods_ns[i], config.speeds[i], params)?;
    }
    let idle = params.alpha * params.s_min.powf(params.gamma) * (1.0 - u).max(0.0);
    Ok(params.beta + dynamic + idle)
}

/// Average dynamic power as a fraction of `α`, i.e. of a CPU that is busy
/// all the time at full speed: `Σ s_i^(γ-1) e_i / p_i`.
pub fn normalized_dynamic_power(config: &SystemConfig, graph: &TaskGraph, gamma: f64) -> Result<f64, PowerError> {
    config.check(graph)?;
    Ok((0..graph.len())
        .map(|i| config.speeds[i].powf(gamma - 1.0) * graph.wcet_ns(i) as f64 / config.periods_ns[i] as f64)
        .sum())
}
