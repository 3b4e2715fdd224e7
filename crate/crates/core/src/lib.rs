// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Energy-optimal multi-mode configuration of periodic task graphs under
//! velocity-dependent end-to-end deadlines.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`]: task sets, dependency DAGs and source-to-sink paths.
//! * [`deadline`]: velocity to deadline mapping and mode partitioning.
//! * [`power`]: utilization and the DVFS power model.
//! * [`gp`]: a log-barrier geometric-program solver.
//! * [`optimizer`]: single- and multi-mode period/speed optimization,
//!   frequency quantization, and the longest useful deadline.
//! * [`modechange`]: worst-case delays of mode transitions.
//! * [`scenario`]: velocity traces.
//! * [`sim`]: a deterministic preemptive EDF simulator with runtime mode
//!   changes, reaction-time measurement and energy integration.
//! * [`config`]: the run-configuration file shared by the CLI.

pub mod config;
pub mod deadline;
pub mod gp;
pub mod graph;
pub mod modechange;
pub mod optimizer;
pub mod power;
pub mod scenario;
pub mod sim;
pub mod time;

pub use config::RunConfig;
pub use deadline::DeadlineMap;
pub use graph::{Path, TaskGraph, TaskSpec, ValidationReport};
pub use modechange::{Direction, TransitionAnalysis};
pub use optimizer::{FrequencyLadder, ModeTable};
pub use power::{PowerParams, SystemConfig};
pub use scenario::Scenario;
pub use sim::{SimOptions, SimTrace};
pub use time::Nanos;

/// Version of this crate, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
