// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Discrete-event simulation of the task graph on one DVFS-capable CPU.
//!
//! Scheduling is preemptive EDF with ties broken by task index. Every task
//! releases at `t = 0`, each job reads its input buffers at release and
//! publishes to its output buffers at completion. Buffers hold one value.
//!
//! At every source release the current velocity selects a mode. A change
//! opens a new epoch. Tasks moving to a shorter deadline switch at their next
//! release; tasks moving to a longer one wait until data of the new epoch has
//! reached every input, then switch at their next release.

mod engine;
pub mod export;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::PowerParams;
use crate::time::Nanos;

pub use engine::simulate;
pub use report::{summarize, FlowStats, Report};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("scenario ends at {scenario_end_ns} ns, before the {horizon_ns} ns horizon")]
    ScenarioTooShort { horizon_ns: Nanos, scenario_end_ns: Nanos },
    #[error("mode table does not match the simulation inputs: {0}")]
    InconsistentTable(String),
    #[error("traces cover {a} ns and {b} ns")]
    HorizonMismatch { a: Nanos, b: Nanos },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Each task switches once new-epoch data reached all of its inputs.
    Alap,
    /// Each task switches at its next release.
    Aeap,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Alap => "alap",
            Protocol::Aeap => "aeap",
        })
    }
}

/// When the sensor behind each source produces data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorSampling {
    /// Each sample arrives just after the previous source release, the
    /// slowest possible pickup.
    WorstCase,
    /// Samples at multiples of a fixed period; a source reads the latest.
    Periodic { period_ns: Nanos },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub power: PowerParams,
    /// Defaults to the end of the scenario.
    pub horizon_ns: Option<Nanos>,
    pub relaxing: Protocol,
    pub shrinking: Protocol,
    pub sensor_sampling: SensorSampling,
    pub record_segments: bool,
}

impl SimOptions {
    pub fn new(power: PowerParams) -> Self {
        SimOptions {
            power,
            horizon_ns: None,
            relaxing: Protocol::Alap,
            shrinking: Protocol::Aeap,
            sensor_sampling: SensorSampling::WorstCase,
            record_segments: true,
        }
    }
}

/// A stretch of execution of one job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub task: usize,
    pub start_ns: Nanos,
    pub end_ns: Nanos,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeChangeEvent {
    pub trigger_ns: Nanos,
    pub from_mode: usize,
    pub to_mode: usize,
    pub protocol: Protocol,
    pub epoch: u64,
    /// When every task had adopted `to_mode`.
    pub completion_ns: Option<Nanos>,
    /// A later change arrived before this one completed.
    pub superseded: bool,
}

/// Delay of one sensor sample through one source-to-sink flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionSample {
    pub source: usize,
    pub sink: usize,
    /// Sensor sample time.
    pub t1_ns: Nanos,
    /// Release of the source job that read the sample.
    pub read_ns: Nanos,
    /// Completion of the first sink job reflecting it.
    pub t2_ns: Nanos,
    /// System mode chosen at the read.
    pub mode: usize,
    /// Deadline of that mode.
    pub guaranteed_ns: Nanos,
    /// Largest delay admitted by the transition analysis for the modes
    /// active while the sample was in flight.
    pub allowed_ns: Nanos,
    /// Deadline implied by the velocity at `t1`.
    pub required_ns: Nanos,
}

impl ReactionSample {
    pub fn delay_ns(&self) -> Nanos {
        self.t2_ns - self.t1_ns
    }

    pub fn is_violation(&self) -> bool {
        self.delay_ns() > self.allowed_ns
    }

    pub fn is_transient(&self) -> bool {
        self.delay_ns() > self.guaranteed_ns && self.delay_ns() <= self.allowed_ns
    }

    pub fn misses_requirement(&self) -> bool {
        self.delay_ns() > self.required_ns
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadlineMiss {
    pub task: usize,
    pub release_ns: Nanos,
    pub deadline_ns: Nanos,
    /// `None` if the job was still unfinished at the horizon.
    pub finish_ns: Option<Nanos>,
}

/// Energy in the power unit of the parameters times seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    /// `α s^γ` while executing.
    pub busy_dynamic: f64,
    /// `α s_min^γ` while idle.
    pub idle_dynamic: f64,
    /// `β` throughout.
    pub static_: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.busy_dynamic + self.idle_dynamic + self.static_
    }

    pub fn dynamic(&self) -> f64 {
        self.busy_dynamic + self.idle_dynamic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub horizon_ns: Nanos,
    /// Source-to-sink pairs with a connecting path.
    pub flows: Vec<(usize, usize)>,
    pub segments: Vec<Segment>,
    pub events: Vec<ModeChangeEvent>,
    pub reactions: Vec<ReactionSample>,
    pub deadline_misses: Vec<DeadlineMiss>,
    pub energy: Energy,
    pub busy_ns: Nanos,
    /// Time spent with each mode as the system target.
    pub mode_residency_ns: Vec<Nanos>,
    pub jobs_released: u64,
    pub jobs_completed: u64,
    /// Source releases whose velocity asked for less than the shortest mode.
    pub out_of_range_decisions: u64,
}

impl SimTrace {
    pub fn violations(&self) -> impl Iterator<Item = &ReactionSample> {
        self.reactions.iter().filter(|r| r.is_violation())
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }

    pub fn transient_count(&self) -> usize {
        self.reactions.iter().filter(|r| r.is_transient()).count()
    }

    pub fn requirement_miss_count(&self) -> usize {
        self.reactions.iter().filter(|r| r.misses_requirement()).count()
    }

    pub fn average_power(&self) -> f64 {
        if self.horizon_ns == 0 {
            return 0.0;
        }
        self.energy.total() / crate::time::ns_to_s(self.horizon_ns)
    }
}
