// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{Energy, SimError, SimTrace};
use crate::power::PowerParams;
use crate::time::{ns_to_s, Nanos};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    pub source: usize,
    pub sink: usize,
    pub samples: usize,
    pub max_reaction_ns: Nanos,
    pub mean_reaction_ns: f64,
    pub violations: usize,
    pub transient_exceedances: usize,
    pub requirement_misses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub horizon_ns: Nanos,
    pub energy: Energy,
    pub total_energy: f64,
    pub average_power: f64,
    pub baseline_energy: f64,
    /// `energy / baseline_energy`.
    pub energy_ratio: f64,
    /// `1 - energy_ratio`, in percent.
    pub reduction_percent: f64,
    /// `β · horizon`, the part no configuration can save.
    pub static_energy: f64,
    /// Busy-time dynamic energy relative to the baseline's.
    pub busy_dynamic_ratio: f64,
    /// `(mode, ns)` for every mode with nonzero residency, 0-based.
    pub mode_residency_ns: Vec<(usize, Nanos)>,
    pub mode_changes: usize,
    pub flows: Vec<FlowStats>,
    pub violations: usize,
    pub transient_exceedances: usize,
    pub requirement_misses: usize,
    pub deadline_misses: usize,
    pub out_of_range_decisions: u64,
}

impl Report {
    /// Zero deadline misses and zero reaction-time violations.
    pub fn is_clean(&self) -> bool {
        self.violations == 0 && self.deadline_misses == 0
    }
}

/// Aggregates a trace against a reference trace over the same horizon.
pub fn summarize(trace: &SimTrace, params: &PowerParams, baseline: &SimTrace) -> Result<Report, SimError> {
    if trace.horizon_ns != baseline.horizon_ns {
        return Err(SimError::HorizonMismatch { a: trace.horizon_ns, b: baseline.horizon_ns });
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    let total = trace.energy.total();
    let base = baseline.energy.total();
    let flows = trace
        .flows
        .iter()
        .map(|&(source, sink)| {
            let rs: Vec<_> = trace.reactions.iter().filter(|r| r.source == source && r.sink == sink).collect();
            let sum: f64 = rs.iter().map(|r| r.delay_ns() as f64).sum();
            FlowStats {
                source,
                sink,
                samples: rs.len(),
                max_reaction_ns: rs.iter().map(|r| r.delay_ns()).max().unwrap_or(0),
                mean_reaction_ns: if rs.is_empty() { 0.0 } else { sum / rs.len() as f64 },
                violations: rs.iter().filter(|r| r.is_violation()).count(),
                transient_exceedances: rs.iter().filter(|r| r.is_transient()).count(),
                requirement_misses: rs.iter().filter(|r| r.misses_requirement()).count(),
            }
        })
        .collect();
    let energy_ratio = ratio(total, base);
    Ok(Report {
        horizon_ns: trace.horizon_ns,
        energy: trace.energy,
        total_energy: total,
        average_power: trace.average_power(),
        baseline_energy: base,
        energy_ratio,
        reduction_percent: 100.0 * (1.0 - energy_ratio),
        busy_dynamic_ratio: ratio(trace.energy.busy_dynamic, baseline.energy.busy_dynamic),
        mode_residency_ns: trace
            .mode_residency_ns
            .iter()
            .enumerate()
            .filter(|&(_, &ns)| ns > 0)
            .map(|(j, &ns)| (j, ns))
            .collect(),
        mode_changes: trace.events.len(),
        flows,
        violations: trace.violation_count(),
        transient_exceedances: trace.transient_count(),
        requirement_misses: trace.requirement_miss_count(),
        deadline_misses: trace.deadline_misses.len(),
        out_of_range_decisions: trace.out_of_range_decisions,
        static_energy: params.beta * ns_to_s(trace.horizon_ns),
    })
}
