// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Period and speed optimization.
//!
//! Both formulations are geometric programs in milliseconds. Their optimal
//! periods come out continuous; [`ModeTable`]s store them floored to whole
//! microseconds with speeds recomputed so that each task keeps one
//! utilization `u_i = e_i / (p_i^j s_i^j)` in every mode.
//!
//! The idle-power term is left out of both objectives. It only matters when
//! every speed sits at `s_min`, which [`derive_dmax`] keeps out of range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gp::{solve_gp, GpError, GpProblem, IterationRecord, Monomial, Posynomial, SolverOptions, Status};
use crate::graph::{GraphError, Path, TaskGraph};
use crate::power::{PowerParams, SystemConfig};
use crate::time::{floor_to_us, ns_to_ms, Nanos, NS_PER_MS, NS_PER_US};

/// Tolerance for comparing speeds against ladder levels and bounds.
const SPEED_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("deadline {deadline_ns} ns is infeasible for this task graph")]
    InfeasibleDeadline { deadline_ns: Nanos },
    #[error("solver failure: {0}")]
    SolverFailure(#[source] GpError),
    #[error("mode {mode}, task {task}: speed {speed} outside [{s_min}, 1]")]
    SpeedOutOfRange { mode: usize, task: usize, speed: f64, s_min: f64 },
    #[error("no frequency level at or above speed {0}")]
    NoLevelAbove(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Discrete speed factors `f_k / f_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLadder {
    levels: Vec<f64>,
}

impl FrequencyLadder {
    pub fn new(levels: Vec<f64>) -> Result<Self, OptimizerError> {
        let ok = !levels.is_empty()
            && levels.iter().all(|&l| l > 0.0 && l <= 1.0)
            && levels.windows(2).all(|w| w[0] < w[1])
            && *levels.last().unwrap() == 1.0;
        if !ok {
            return Err(OptimizerError::InvalidInput(format!(
                "ladder levels must be strictly increasing in (0, 1] and end at 1.0: {levels:?}"
            )));
        }
        Ok(FrequencyLadder { levels })
    }

    /// `count` evenly spaced frequencies from `f_min` to `f_max`.
    pub fn even(f_min_mhz: f64, f_max_mhz: f64, count: usize) -> Result<Self, OptimizerError> {
        if !(f_min_mhz > 0.0 && f_min_mhz < f_max_mhz) || count < 2 {
            if count == 1 && f_max_mhz > 0.0 {
                return FrequencyLadder::new(vec![1.0]);
            }
            return Err(OptimizerError::InvalidInput(format!(
                "need 0 < f_min < f_max and count >= 2 (got {f_min_mhz}, {f_max_mhz}, {count})"
            )));
        }
        let step = (f_max_mhz - f_min_mhz) / (count - 1) as f64;
        let mut levels: Vec<f64> = (0..count - 1).map(|k| (f_min_mhz + k as f64 * step) / f_max_mhz).collect();
        levels.push(1.0);
        FrequencyLadder::new(levels)
    }

    /// Twelve levels from 345 MHz to 2 GHz.
    pub fn reference() -> Self {
        FrequencyLadder::even(345.0, 2000.0, 12).expect("valid reference ladder")
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn lowest(&self) -> f64 {
        self.levels[0]
    }

    /// Smallest level not below `s`.
    pub fn quantize(&self, s: f64) -> Result<f64, OptimizerError> {
        let target = s * (1.0 - 1e-12);
        self.levels
            .iter()
            .copied()
            .find(|&l| l >= target)
            .ok_or(OptimizerError::NoLevelAbove(s))
    }
}

/// Per-mode periods and speeds sharing one utilization per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub mode_deadlines_ns: Vec<Nanos>,
    /// `periods_ns[j][i]` is task `i`'s period in mode `j`.
    pub periods_ns: Vec<Vec<Nanos>>,
    pub speeds: Vec<Vec<f64>>,
    pub utilizations: Vec<f64>,
    /// Speeds rounded up to ladder levels; utilizations are then upper bounds.
    #[serde(default)]
    pub quantized: bool,
}

impl ModeTable {
    /// The same configuration in every mode.
    pub fn uniform(mode_deadlines_ns: Vec<Nanos>, config: &SystemConfig, graph: &TaskGraph) -> Self {
        let m = mode_deadlines_ns.len();
        let utilizations = (0..graph.len())
            .map(|i| graph.wcet_ns(i) as f64 / (config.periods_ns[i] as f64 * config.speeds[i]))
            .collect();
        ModeTable {
            mode_deadlines_ns,
            periods_ns: vec![config.periods_ns.clone(); m],
            speeds: vec![config.speeds.clone(); m],
            utilizations,
            quantized: false,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.mode_deadlines_ns.len()
    }

    pub fn task_count(&self) -> usize {
        self.utilizations.len()
    }

    pub fn config(&self, mode: usize) -> SystemConfig {
        SystemConfig { periods_ns: self.periods_ns[mode].clone(), speeds: self.speeds[mode].clone() }
    }

    /// `Σ s^(γ-1) e / p` of one mode, as a fraction of `α`.
    pub fn normalized_dynamic_power(&self, mode: usize, graph: &TaskGraph, gamma: f64) -> f64 {
        (0..graph.len())
            .map(|i| {
                self.speeds[mode][i].powf(gamma - 1.0) * graph.wcet_ns(i) as f64 / self.periods_ns[mode][i] as f64
            })
            .sum()
    }

    /// Checks the structural table invariants; returns a description of the
    /// first one that fails.
    pub fn check(&self, graph: &TaskGraph, paths: &[Path], s_min: f64) -> Result<(), String> {
        let (m, n) = (self.mode_count(), graph.len());
        if m == 0 {
            return Err("table has no modes".into());
        }
        if self.periods_ns.len() != m || self.speeds.len() != m || self.utilizations.len() != n {
            return Err("table dimensions disagree".into());
        }
        if self.periods_ns.iter().any(|r| r.len() != n)
            || self.speeds.iter().any(|r| r.len() != n)
        {
            return Err("table rows have the wrong task count".into());
        }
        if self.mode_deadlines_ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err("mode deadlines are not strictly increasing".into());
        }
        let total: f64 = self.utilizations.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(format!("total utilization {total} exceeds 1"));
        }
        for j in 0..m {
            for path in paths {
                let delay: Nanos = path.tasks().iter().map(|&i| 2 * self.periods_ns[j][i]).sum();
                if delay > self.mode_deadlines_ns[j] {
                    return Err(format!("mode {j}: path {path} delay {delay} ns exceeds deadline"));
                }
            }
            for i in 0..n {
                let s = self.speeds[j][i];
                if s < s_min - SPEED_TOL || s > 1.0 + SPEED_TOL {
                    return Err(format!("mode {j}, task {i}: speed {s} out of range"));
                }
                if self.periods_ns[j][i] == 0 {
                    return Err(format!("mode {j}, task {i}: zero period"));
                }
                let u = graph.wcet_ns(i) as f64 / (self.periods_ns[j][i] as f64 * s);
                let ok = if self.quantized {
                    u <= self.utilizations[i] * (1.0 + 1e-9)
                } else {
                    (u - self.utilizations[i]).abs() <= 1e-9 * self.utilizations[i]
                };
                if !ok {
                    return Err(format!("mode {j}, task {i}: utilization {u} vs {}", self.utilizations[i]));
                }
                if j > 0 && self.periods_ns[j][i] < self.periods_ns[j - 1][i] {
                    return Err(format!("task {i}: period shrinks from mode {} to {j}", j - 1));
                }
            }
        }
        Ok(())
    }
}

/// Result of a single-mode solve.
#[derive(Debug, Clone)]
pub struct SingleModeSolution {
    pub config: SystemConfig,
    /// Continuous optimum of `Σ s^(γ-1) e / p` (fraction of `α`).
    pub objective: f64,
    /// Raw optimal speed before any clamping to `s_min`.
    pub raw_speed: f64,
    /// Every speed was raised to `s_min`: the deadline lies beyond the
    /// range where slowing down saves energy.
    pub floored: bool,
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct MultiModeSolution {
    pub table: ModeTable,
    /// Continuous optimum of the summed per-mode dynamic power.
    pub objective: f64,
    pub log: Vec<IterationRecord>,
}

fn wcets_ms(graph: &TaskGraph) -> Vec<f64> {
    (0..graph.len()).map(|i| ns_to_ms(graph.wcet_ns(i))).collect()
}

fn path_constraint(path: &Path, d_ms: f64, var: impl Fn(usize) -> usize) -> Posynomial {
    path.tasks()
        .iter()
        .map(|&i| Monomial::new(2.0 / d_ms, [(var(i), 1.0)]))
        .collect()
}

/// Lower speed bound handed to the solver; low enough to never bind.
fn speed_floor(params: &PowerParams) -> f64 {
    params.s_min.min(1e-3) * 1e-2
}

/// Single-mode program over `p_0..p_{n-1}` (ms) then `s_0..s_{n-1}`.
pub fn single_mode_problem(
    graph: &TaskGraph,
    params: &PowerParams,
    paths: &[Path],
    deadline_ns: Nanos,
) -> GpProblem {
    let n = graph.len();
    let e = wcets_ms(graph);
    let d = ns_to_ms(deadline_ns);
    let g = params.gamma;
    let objective: Posynomial =
        (0..n).map(|i| Monomial::new(e[i], [(i, -1.0), (n + i, g - 1.0)])).collect();
    let mut lower: Vec<f64> = e.iter().map(|&ei| 0.5 * ei).collect();
    let mut upper = vec![d.max(e.iter().copied().fold(0.0, f64::max)); n];
    lower.extend(std::iter::repeat(speed_floor(params)).take(n));
    upper.extend(std::iter::repeat(1.0).take(n));
    let mut problem = GpProblem::new(objective, lower, upper);
    problem.constrain((0..n).map(|i| Monomial::new(e[i], [(i, -1.0), (n + i, -1.0)])).collect::<Posynomial>());
    for path in paths {
        problem.constrain(path_constraint(path, d, |i| i));
    }
    problem
}

/// Multi-mode program over `p_i^j` at index `j·n + i` (ms), then `u_i`.
pub fn multi_mode_problem(
    graph: &TaskGraph,
    params: &PowerParams,
    paths: &[Path],
    mode_deadlines_ns: &[Nanos],
) -> GpProblem {
    let n = graph.len();
    let m = mode_deadlines_ns.len();
    let e = wcets_ms(graph);
    let g = params.gamma;
    let u = |i: usize| m * n + i;
    let mut terms = Vec::with_capacity(m * n);
    for j in 0..m {
        for i in 0..n {
            terms.push(Monomial::new(e[i].powf(g), [(j * n + i, -g), (u(i), 1.0 - g)]));
        }
    }
    let mut lower = Vec::with_capacity(m * n + n);
    let mut upper = Vec::with_capacity(m * n + n);
    for &dj in mode_deadlines_ns {
        let d = ns_to_ms(dj);
        for &ei in &e {
            lower.push(0.5 * ei);
            upper.push(d.max(ei));
        }
    }
    lower.extend(std::iter::repeat(1e-6).take(n));
    upper.extend(std::iter::repeat(2.0).take(n));
    let mut problem = GpProblem::new(Posynomial::new(terms), lower, upper);
    problem.constrain((0..n).map(|i| Monomial::new(1.0, [(u(i), 1.0)])).collect::<Posynomial>());
    for (j, &dj) in mode_deadlines_ns.iter().enumerate() {
        for path in paths {
            problem.constrain(path_constraint(path, ns_to_ms(dj), |i| j * n + i));
        }
        for i in 0..n {
            problem.constrain(Monomial::new(e[i], [(j * n + i, -1.0), (u(i), -1.0)]));
        }
    }
    problem
}

fn check_deadlines(mode_deadlines_ns: &[Nanos]) -> Result<(), OptimizerError> {
    if mode_deadlines_ns.is_empty() || mode_deadlines_ns[0] == 0 || mode_deadlines_ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OptimizerError::InvalidInput(format!(
            "mode deadlines must be positive and strictly increasing: {mode_deadlines_ns:?}"
        )));
    }
    Ok(())
}

fn classify(status: Status, deadline_ns: Nanos, iterations: usize) -> Result<(), OptimizerError> {
    match status {
        Status::Optimal => Ok(()),
        Status::Infeasible => Err(OptimizerError::InfeasibleDeadline { deadline_ns }),
        Status::MaxIterations => Err(OptimizerError::SolverFailure(GpError::MaxIterations { iterations })),
    }
}

/// Whole-microsecond periods. A value within solver tolerance below a
/// microsecond boundary snaps up to it unless that breaks a path bound.
fn round_periods(row: &[f64], paths: &[Path], deadline_ns: Nanos) -> Vec<Nanos> {
    let snapped: Vec<Nanos> = row
        .iter()
        .map(|&p| {
            let up = (p * 1_000.0).round();
            if up >= p * 1_000.0 && up - p * 1_000.0 <= 1e-6 * p * 1_000.0 {
                up as Nanos * NS_PER_US
            } else {
                floor_to_us(p)
            }
        })
        .collect();
    let fits = paths
        .iter()
        .all(|path| path.tasks().iter().map(|&i| 2 * snapped[i]).sum::<Nanos>() <= deadline_ns);
    if fits {
        snapped
    } else {
        row.iter().map(|&p| floor_to_us(p)).collect()
    }
}

/// Rounds periods to whole microseconds, trims every utilization so that
/// per-job nanosecond rounding of `e/s` cannot overload the processor, and
/// recomputes speeds.
fn finalize(
    graph: &TaskGraph,
    paths: &[Path],
    mode_deadlines_ns: Vec<Nanos>,
    periods_ms: &[Vec<f64>],
    utilizations: &[f64],
) -> Result<ModeTable, OptimizerError> {
    let n = graph.len();
    let periods_ns: Vec<Vec<Nanos>> = periods_ms
        .iter()
        .zip(&mode_deadlines_ns)
        .map(|(row, &d)| round_periods(row, paths, d))
        .collect();
    for row in &periods_ns {
        if row.contains(&0) {
            return Err(OptimizerError::InvalidInput("a period rounds to zero microseconds".into()));
        }
    }
    let min_period = |i: usize| periods_ns.iter().map(|r| r[i]).min().unwrap();
    let headroom: f64 = (0..n).map(|i| 1.0 / min_period(i) as f64).sum::<f64>() + 1e-9;
    let mut u: Vec<f64> = utilizations.iter().map(|&ui| ui * (1.0 - headroom)).collect();
    for (i, ui) in u.iter_mut().enumerate() {
        // A task that would need more than full speed runs at exactly 1, where
        // execution times are exact and need no headroom.
        let e = graph.wcet_ns(i) as f64;
        let needed = e / min_period(i) as f64;
        if needed > *ui {
            *ui = needed;
        }
    }
    let speeds = periods_ns
        .iter()
        .map(|row| (0..n).map(|i| (graph.wcet_ns(i) as f64 / (row[i] as f64 * u[i])).min(1.0)).collect())
        .collect();
    Ok(ModeTable { mode_deadlines_ns, periods_ns, speeds, utilizations: u, quantized: false })
}

/// Minimizes dynamic power for one deadline subject to schedulability and
/// every path delay bound `Σ 2 p_i <= d`.
pub fn optimize_single_mode(
    graph: &TaskGraph,
    params: &PowerParams,
    deadline_ns: Nanos,
    options: &SolverOptions,
) -> Result<SingleModeSolution, OptimizerError> {
    check_deadlines(&[deadline_ns])?;
    let paths = graph.enumerate_paths()?;
    let n = graph.len();
    if n == 0 {
        let config = SystemConfig { periods_ns: vec![], speeds: vec![] };
        return Ok(SingleModeSolution { config, objective: 0.0, raw_speed: 0.0, floored: false, log: vec![] });
    }
    let problem = single_mode_problem(graph, params, &paths, deadline_ns);
    let sol = solve_gp(&problem, options).map_err(OptimizerError::SolverFailure)?;
    classify(sol.status, deadline_ns, sol.outer_iterations)?;

    let periods_ms = sol.values[..n].to_vec();
    let raw_speed = sol.values[n..].iter().copied().fold(0.0, f64::max);
    let floored = raw_speed < params.s_min;
    let e = wcets_ms(graph);
    let utilizations: Vec<f64> = (0..n)
        .map(|i| e[i] / (periods_ms[i] * sol.values[n + i].max(params.s_min)))
        .collect();
    let table = finalize(graph, &paths, vec![deadline_ns], &[periods_ms], &utilizations)?;
    Ok(SingleModeSolution {
        config: table.config(0),
        objective: sol.objective_value,
        raw_speed,
        floored,
        log: sol.log,
    })
}

/// Jointly optimizes every mode with one shared utilization per task.
pub fn optimize_multi_mode(
    graph: &TaskGraph,
    params: &PowerParams,
    mode_deadlines_ns: &[Nanos],
    options: &SolverOptions,
) -> Result<MultiModeSolution, OptimizerError> {
    check_deadlines(mode_deadlines_ns)?;
    let paths = graph.enumerate_paths()?;
    let (n, m) = (graph.len(), mode_deadlines_ns.len());
    if n == 0 {
        let table = ModeTable {
            mode_deadlines_ns: mode_deadlines_ns.to_vec(),
            periods_ns: vec![vec![]; m],
            speeds: vec![vec![]; m],
            utilizations: vec![],
            quantized: false,
        };
        return Ok(MultiModeSolution { table, objective: 0.0, log: vec![] });
    }
    let problem = multi_mode_problem(graph, params, &paths, mode_deadlines_ns);
    let sol = solve_gp(&problem, options).map_err(OptimizerError::SolverFailure)?;
    classify(sol.status, mode_deadlines_ns[0], sol.outer_iterations)?;

    let e = wcets_ms(graph);
    let u = &sol.values[m * n..];
    for j in 0..m {
        for i in 0..n {
            let s = e[i] / (sol.values[j * n + i] * u[i]);
            if s < params.s_min * (1.0 - 1e-6) || s > 1.0 + 1e-6 {
                return Err(OptimizerError::SpeedOutOfRange { mode: j, task: i, speed: s, s_min: params.s_min });
            }
        }
    }
    let periods_ms: Vec<Vec<f64>> = (0..m).map(|j| sol.values[j * n..(j + 1) * n].to_vec()).collect();
    let mut table = finalize(graph, &paths, mode_deadlines_ns.to_vec(), &periods_ms, u)?;
    // Solver tolerance may leave the slowest mode a hair under s_min.
    for row in &mut table.speeds {
        for s in row.iter_mut() {
            if *s < params.s_min {
                *s = params.s_min;
            }
        }
    }
    Ok(MultiModeSolution { table, objective: sol.objective_value, log: sol.log })
}

/// Rounds every speed up to the next ladder level.
pub fn quantize_speeds(table: &ModeTable, ladder: &FrequencyLadder) -> Result<ModeTable, OptimizerError> {
    let speeds = table
        .speeds
        .iter()
        .map(|row| row.iter().map(|&s| ladder.quantize(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ModeTable { speeds, quantized: true, ..table.clone() })
}

/// Largest deadline, at 1 ms resolution, whose single-mode optimum still
/// runs above `s_min`. With `s_min = 1` this is the tightest feasible
/// deadline.
pub fn derive_dmax(graph: &TaskGraph, params: &PowerParams, options: &SolverOptions) -> Result<Nanos, OptimizerError> {
    let solve = |d_ms: u64| optimize_single_mode(graph, params, d_ms * NS_PER_MS, options);
    if graph.is_empty() {
        return Err(OptimizerError::InvalidInput("empty task graph".into()));
    }

    // Tightest feasible deadline: bisect on feasibility.
    let mut hi = 1u64;
    loop {
        match solve(hi) {
            Ok(_) => break,
            Err(OptimizerError::InfeasibleDeadline { .. }) => hi *= 2,
            Err(e) => return Err(e),
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match solve(mid) {
            Ok(_) => hi = mid,
            Err(OptimizerError::InfeasibleDeadline { .. }) => lo = mid,
            Err(e) => return Err(e),
        }
    }
    let d_feas = hi;

    let above = |d_ms: u64| solve(d_ms).map(|s| s.raw_speed >= params.s_min);
    if !above(d_feas)? {
        return Ok(d_feas * NS_PER_MS);
    }
    let mut lo = d_feas;
    let mut hi = d_feas * 2;
    while above(hi)? {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo * NS_PER_MS)
}

/// Comparison methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Every task at full speed with the static periods.
    Baseline,
    /// One configuration optimized for the tightest deadline.
    Static,
    /// One configuration per mode.
    Multimode,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Baseline, Method::Static, Method::Multimode];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Static => "static",
            Method::Multimode => "multimode",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "static" => Ok(Method::Static),
            "multimode" | "multi-mode" | "multi" => Ok(Method::Multimode),
            other => Err(format!("unknown method '{other}' (expected baseline, static or multimode)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Continuous mode tables for all three methods over the same modes.
#[derive(Debug, Clone)]
pub struct MethodTables {
    pub baseline: ModeTable,
    pub static_: ModeTable,
    pub multimode: ModeTable,
}

impl MethodTables {
    pub fn build(
        graph: &TaskGraph,
        params: &PowerParams,
        mode_deadlines_ns: &[Nanos],
        options: &SolverOptions,
    ) -> Result<Self, OptimizerError> {
        let multimode = optimize_multi_mode(graph, params, mode_deadlines_ns, options)?.table;
        let fixed = optimize_single_mode(graph, params, mode_deadlines_ns[0], options)?.config;
        let static_ = ModeTable::uniform(mode_deadlines_ns.to_vec(), &fixed, graph);
        let full = SystemConfig { periods_ns: fixed.periods_ns.clone(), speeds: vec![1.0; graph.len()] };
        let baseline = ModeTable::uniform(mode_deadlines_ns.to_vec(), &full, graph);
        Ok(MethodTables { baseline, static_, multimode })
    }

    pub fn get(&self, method: Method) -> &ModeTable {
        match method {
            Method::Baseline => &self.baseline,
            Method::Static => &self.static_,
            Method::Multimode => &self.multimode,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TaskSpec;
    use crate::power::{normalized_dynamic_power, utilization};

    fn chain(wcets_ms: &[u64]) -> TaskGraph {
        let tasks = wcets_ms
            .iter()
            .enumerate()
            .map(|(i, &w)| TaskSpec { name: format!("t{i}"), wcet_ns: w * NS_PER_MS })
            .collect();
        let edges = (1..wcets_ms.len()).map(|i| (i - 1, i)).collect();
        TaskGraph::new(tasks, edges).unwrap()
    }

    fn cubic(s_min: f64) -> PowerParams {
        PowerParams { alpha: 1.0, beta: 0.0, gamma: 3.0, s_min }
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    // Brute-force oracle for one task: minimize s²/p over a (p, s) grid with
    // 2p <= d, e/(p s) <= 1, s <= 1.
    fn grid_one_task(e: f64, d: f64) -> f64 {
        let mut best = f64::INFINITY;
        let mut p = e;
        while p <= d / 2.0 + 1e-12 {
            let s = e / p;
            if s <= 1.0 {
                best = best.min(s * s * e / p);
            }
            p += 1e-3;
        }
        best
    }

    #[test]
    fn one_task_single_mode() {
        let g = chain(&[1]);
        let sol = optimize_single_mode(&g, &cubic(0.1), 4 * NS_PER_MS, &opts()).unwrap();
        let p = sol.config.periods_ns[0] as f64 / 1e6;
        assert!((p - 2.0).abs() / 2.0 < 1e-4, "p={p}");
        assert!((sol.config.speeds[0] - 0.5).abs() / 0.5 < 1e-4);
        assert!((sol.objective - 0.125).abs() < 1e-6);
        assert!((grid_one_task(1.0, 4.0) - 0.125).abs() < 1e-3);
        let nd = normalized_dynamic_power(&sol.config, &g, 3.0).unwrap();
        assert!((nd - 0.125).abs() < 1e-4);
        assert!(!sol.floored);
    }

    #[test]
    fn two_task_chain_is_infeasible() {
        let g = chain(&[1, 1]);
        let err = optimize_single_mode(&g, &cubic(0.1), 4 * NS_PER_MS, &opts()).unwrap_err();
        assert!(matches!(err, OptimizerError::InfeasibleDeadline { .. }), "{err}");
    }

    #[test]
    fn one_task_two_modes() {
        let g = chain(&[1]);
        let sol = optimize_multi_mode(&g, &cubic(0.1), &[4 * NS_PER_MS, 8 * NS_PER_MS], &opts()).unwrap();
        let t = &sol.table;
        assert!((t.utilizations[0] - 1.0).abs() < 1e-4);
        assert!((t.periods_ns[0][0] as f64 / 1e6 - 2.0).abs() < 2e-4);
        assert!((t.periods_ns[1][0] as f64 / 1e6 - 4.0).abs() < 4e-4);
        assert!((t.speeds[0][0] - 0.5).abs() < 5e-5);
        assert!((t.speeds[1][0] - 0.25).abs() < 2.5e-5);
        // 1/8 + 1/64 with u = 1.
        assert!((sol.objective - 9.0 / 64.0).abs() < 1e-6);
        let paths = g.enumerate_paths().unwrap();
        t.check(&g, &paths, 0.1).unwrap();
    }

    #[test]
    fn one_mode_matches_single_mode() {
        let g = chain(&[1, 2, 1]);
        let d = 30 * NS_PER_MS;
        let single = optimize_single_mode(&g, &cubic(0.05), d, &opts()).unwrap();
        let multi = optimize_multi_mode(&g, &cubic(0.05), &[d], &opts()).unwrap();
        assert!((single.objective - multi.objective).abs() <= 1e-6 * single.objective);
    }

    #[test]
    fn speed_out_of_range_beyond_dmax() {
        let g = chain(&[1]);
        // d_max for s_min = 0.5 is 4 ms; a mode at 10 ms needs s = 0.2.
        let err = optimize_multi_mode(&g, &cubic(0.5), &[4 * NS_PER_MS, 10 * NS_PER_MS], &opts()).unwrap_err();
        assert!(matches!(err, OptimizerError::SpeedOutOfRange { mode: 1, .. }), "{err}");
    }

    #[test]
    fn ladder_quantization() {
        let ladder = FrequencyLadder::reference();
        assert_eq!(ladder.levels().len(), 12);
        assert_eq!(ladder.lowest(), 0.1725);
        assert!((ladder.levels()[1] - (345.0 + 1655.0 / 11.0) / 2000.0).abs() < 1e-15);
        let q = ladder.quantize(0.30).unwrap();
        assert!((q - (345.0 + 2.0 * 1655.0 / 11.0) / 2000.0).abs() < 1e-15);
        assert!((q - 0.32295).abs() < 1e-5);
        assert_eq!(ladder.quantize(1.0).unwrap(), 1.0);
        assert_eq!(ladder.quantize(0.1725).unwrap(), 0.1725);
        assert!(matches!(ladder.quantize(1.01), Err(OptimizerError::NoLevelAbove(_))));
        assert!(FrequencyLadder::new(vec![0.5, 0.4, 1.0]).is_err());
        assert!(FrequencyLadder::new(vec![0.5, 0.9]).is_err());
    }

    #[test]
    fn quantized_table_keeps_periods_and_lowers_utilization() {
        let g = chain(&[1, 2]);
        let params = cubic(0.1725);
        let sol = optimize_multi_mode(&g, &params, &[20 * NS_PER_MS, 30 * NS_PER_MS], &opts()).unwrap();
        let q = quantize_speeds(&sol.table, &FrequencyLadder::reference()).unwrap();
        assert_eq!(q.periods_ns, sol.table.periods_ns);
        let paths = g.enumerate_paths().unwrap();
        q.check(&g, &paths, params.s_min).unwrap();
        for j in 0..2 {
            assert!(utilization(&q.config(j), &g).unwrap() <= utilization(&sol.table.config(j), &g).unwrap());
        }
    }

    #[test]
    fn dmax_one_task() {
        let g = chain(&[1]);
        let d = derive_dmax(&g, &cubic(0.5), &opts()).unwrap();
        assert_eq!(d, 4 * NS_PER_MS);
    }

    #[test]
    fn dmax_without_dvfs_is_tightest_deadline() {
        // Two equal tasks in a chain: tightest d solves (√1+√1)²·2/d = 1 → 8 ms.
        // The boundary itself has no strictly feasible point.
        let g = chain(&[1, 1]);
        let d = derive_dmax(&g, &cubic(1.0), &opts()).unwrap();
        assert!(d == 8 * NS_PER_MS || d == 9 * NS_PER_MS, "{d}");
    }

    #[test]
    fn method_parsing() {
        assert_eq!("static".parse::<Method>().unwrap(), Method::Static);
        assert!("fast".parse::<Method>().is_err());
    }
}
