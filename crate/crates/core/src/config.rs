// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration shared by every CLI subcommand.
//!
//! ```json
//! {
//!   "task_graph": "waters_graph.json",
//!   "power": { "alpha_mw": 842.04, "beta_mw": 232.81, "gamma": 2.64, "s_min": 0.1725 },
//!   "frequency_ladder": { "f_min_mhz": 345, "f_max_mhz": 2000, "count": 12 },
//!   "deadline_map": { "lambda_m": 20, "a_max_mps2": 2.5, "v_design_mps": 31.667, "mode_count": 24 },
//!   "scenarios": ["scenarios/city.csv"],
//!   "scenario_units": "kmh",
//!   "methods": ["baseline", "static", "multimode"],
//!   "output_dir": "out"
//! }
//! ```
//!
//! Relative paths resolve against the directory holding the config file.
//! Omitted fields fall back to the reference values; an omitted task graph
//! selects the bundled WATERS graph, an omitted `d_max_ns` is derived from the
//! graph, and `d_min_ns` may be replaced by a design velocity.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deadline::{deadline_from_velocity, DeadlineError, DeadlineMap};
use crate::gp::SolverOptions;
use crate::graph::{GraphError, TaskGraph};
use crate::optimizer::{derive_dmax, FrequencyLadder, Method, OptimizerError};
use crate::power::{PowerError, PowerParams};
use crate::scenario::{Scenario, ScenarioError, Units, DEFAULT_V_MAX};
use crate::sim::{Protocol, SensorSampling, SimOptions};
use crate::time::Nanos;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed run configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("referenced file does not exist: {0}")]
    MissingFile(PathBuf),
    #[error("invalid run configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Deadline(#[from] DeadlineError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("scenario {path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LadderSpec {
    Levels { levels: Vec<f64> },
    Even { f_min_mhz: f64, f_max_mhz: f64, count: usize },
}

impl Default for LadderSpec {
    fn default() -> Self {
        LadderSpec::Even { f_min_mhz: 345.0, f_max_mhz: 2000.0, count: 12 }
    }
}

impl LadderSpec {
    pub fn build(&self) -> Result<FrequencyLadder, OptimizerError> {
        match self {
            LadderSpec::Levels { levels } => FrequencyLadder::new(levels.clone()),
            &LadderSpec::Even { f_min_mhz, f_max_mhz, count } => FrequencyLadder::even(f_min_mhz, f_max_mhz, count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeadlineMapSpec {
    pub lambda_m: f64,
    pub a_max_mps2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min_ns: Option<Nanos>,
    /// Highest velocity the system must serve; sets `d_min` when that is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_design_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max_ns: Option<Nanos>,
    pub mode_count: usize,
}

impl Default for DeadlineMapSpec {
    fn default() -> Self {
        DeadlineMapSpec {
            lambda_m: 20.0,
            a_max_mps2: 2.5,
            d_min_ns: None,
            v_design_mps: Some(114.0 / 3.6),
            d_max_ns: None,
            mode_count: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default = "default_relaxing")]
    pub relaxing: Protocol,
    #[serde(default = "default_shrinking")]
    pub shrinking: Protocol,
    #[serde(default = "default_sampling")]
    pub sensor_sampling: SensorSampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_ns: Option<Nanos>,
}

fn default_relaxing() -> Protocol {
    Protocol::Alap
}

fn default_shrinking() -> Protocol {
    Protocol::Aeap
}

fn default_sampling() -> SensorSampling {
    SensorSampling::WorstCase
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            relaxing: default_relaxing(),
            shrinking: default_shrinking(),
            sensor_sampling: default_sampling(),
            horizon_ns: None,
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_v_max() -> f64 {
    DEFAULT_V_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_graph: Option<PathBuf>,
    #[serde(default = "PowerParams::reference")]
    pub power: PowerParams,
    #[serde(default)]
    pub frequency_ladder: LadderSpec,
    #[serde(default)]
    pub deadline_map: DeadlineMapSpec,
    #[serde(default)]
    pub scenarios: Vec<PathBuf>,
    #[serde(default)]
    pub scenario_units: Units,
    #[serde(default = "default_v_max")]
    pub scenario_v_max_mps: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task_graph: None,
            power: PowerParams::reference(),
            frequency_ladder: LadderSpec::default(),
            deadline_map: DeadlineMapSpec::default(),
            scenarios: Vec::new(),
            scenario_units: Units::default(),
            scenario_v_max_mps: DEFAULT_V_MAX,
            methods: default_methods(),
            output_dir: None,
            simulation: SimulationSpec::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Parses and validates; relative paths resolve against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let mut config: RunConfig = serde_json::from_str(text)?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::from_json_str(&text, base)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.power.validate()?;
        self.ladder()?;
        let dm = &self.deadline_map;
        if dm.mode_count == 0 {
            return Err(ConfigError::Invalid("mode_count must be at least 1".into()));
        }
        if !(dm.lambda_m > 0.0 && dm.a_max_mps2 > 0.0) {
            return Err(DeadlineError::InvalidPhysics { lambda: dm.lambda_m, a_max: dm.a_max_mps2 }.into());
        }
        if dm.d_min_ns.is_none() && dm.v_design_mps.is_none() {
            return Err(ConfigError::Invalid("deadline_map needs d_min_ns or v_design_mps".into()));
        }
        if self.methods.is_empty() {
            return Err(ConfigError::Invalid("methods must not be empty".into()));
        }
        if !(self.scenario_v_max_mps > 0.0) {
            return Err(ConfigError::Invalid("scenario_v_max_mps must be positive".into()));
        }
        for path in self.task_graph.iter().chain(&self.scenarios) {
            let full = self.resolve(path);
            if !full.is_file() {
                return Err(ConfigError::MissingFile(full));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<TaskGraph, ConfigError> {
        match &self.task_graph {
            Some(path) => Ok(TaskGraph::load(self.resolve(path))?),
            None => Ok(TaskGraph::waters()),
        }
    }

    pub fn ladder(&self) -> Result<FrequencyLadder, ConfigError> {
        Ok(self.frequency_ladder.build()?)
    }

    pub fn d_min_ns(&self) -> Result<Nanos, ConfigError> {
        let dm = &self.deadline_map;
        match (dm.d_min_ns, dm.v_design_mps) {
            (Some(d), _) => Ok(d),
            (None, Some(v)) => Ok(deadline_from_velocity(v, dm.lambda_m, dm.a_max_mps2)?),
            (None, None) => Err(ConfigError::Invalid("deadline_map needs d_min_ns or v_design_mps".into())),
        }
    }

    /// Builds the deadline map, deriving `d_max` from the graph if absent.
    pub fn deadline_map(&self, graph: &TaskGraph, solver: &SolverOptions) -> Result<DeadlineMap, ConfigError> {
        let dm = &self.deadline_map;
        let d_max = match dm.d_max_ns {
            Some(d) => d,
            None => derive_dmax(graph, &self.power, solver)?,
        };
        Ok(DeadlineMap::new(dm.lambda_m, dm.a_max_mps2, self.d_min_ns()?, d_max, dm.mode_count)?)
    }

    pub fn scenario_paths(&self) -> Vec<PathBuf> {
        self.scenarios.iter().map(|p| self.resolve(p)).collect()
    }

    pub fn load_scenario(&self, path: &Path) -> Result<Scenario, ConfigError> {
        Scenario::load_with_limit(path, self.scenario_units, self.scenario_v_max_mps)
            .map_err(|source| ConfigError::Scenario { path: path.to_path_buf(), source })
    }

    pub fn load_scenarios(&self) -> Result<Vec<Scenario>, ConfigError> {
        self.scenario_paths().iter().map(|p| self.load_scenario(p)).collect()
    }

    pub fn sim_options(&self) -> SimOptions {
        let mut opts = SimOptions::new(self.power);
        opts.relaxing = self.simulation.relaxing;
        opts.shrinking = self.simulation.shrinking;
        opts.sensor_sampling = self.simulation.sensor_sampling;
        opts.horizon_ns = self.simulation.horizon_ns;
        opts
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output_dir.as_deref().map(|p| self.resolve(p))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
