// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use super::{
    DeadlineMiss, Energy, ModeChangeEvent, Protocol, ReactionSample, Segment, SensorSampling, SimError, SimOptions,
    SimTrace,
};
use crate::deadline::DeadlineMap;
use crate::graph::TaskGraph;
use crate::modechange::DelayMatrix;
use crate::optimizer::ModeTable;
use crate::scenario::Scenario;
use crate::time::{ns_to_s, Nanos};

/// What a value in a buffer reflects: per source, the oldest sensor read it
/// depends on, and the oldest mode epoch among its inputs.
#[derive(Debug, Clone)]
struct Stamp {
    prov: Vec<Option<Nanos>>,
    epoch: u64,
}

struct Job {
    task: usize,
    seq: u64,
    release: Nanos,
    deadline: Nanos,
    remaining: Nanos,
    speed: f64,
    stamp: Stamp,
}

#[derive(Clone, Copy)]
struct Pending {
    target: usize,
    epoch: u64,
}

struct TaskState {
    mode: usize,
    next_release: Nanos,
    last_release: Option<Nanos>,
    pending: Option<Pending>,
    /// `(time, mode)` at every switch, starting at `t = 0`.
    history: Vec<(Nanos, usize)>,
    last_sample: Option<Nanos>,
}

struct InFlight {
    read: Nanos,
    t1: Nanos,
    read_ns: Nanos,
    mode: usize,
    required: Nanos,
}

struct Flow {
    source_idx: usize,
    source: usize,
    sink: usize,
    queue: VecDeque<InFlight>,
}

struct Sim<'a> {
    graph: &'a TaskGraph,
    table: &'a ModeTable,
    map: &'a DeadlineMap,
    scenario: &'a Scenario,
    opts: &'a SimOptions,
    delays: DelayMatrix,
    source_idx: Vec<Option<usize>>,
    n_sources: usize,
    /// `relevant[s][task]`: inputs of `task` that depend on source `s`.
    relevant: Vec<Vec<Vec<usize>>>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    buffers: Vec<Option<Stamp>>,
    tasks: Vec<TaskState>,
    jobs: Vec<Job>,
    flows: Vec<Flow>,
    target: usize,
    epoch: u64,
    decided_at: Option<Nanos>,
    next_seq: u64,
    last_segment_seq: Option<u64>,
    trace: SimTrace,
}

fn consistency(graph: &TaskGraph, table: &ModeTable, map: &DeadlineMap) -> Result<(), SimError> {
    let bad = |m: String| Err(SimError::InconsistentTable(m));
    let n = graph.len();
    let m = table.mode_count();
    if m == 0 {
        return bad("table has no modes".into());
    }
    if table.utilizations.len() != n
        || table.periods_ns.len() != m
        || table.speeds.len() != m
        || table.periods_ns.iter().any(|r| r.len() != n)
        || table.speeds.iter().any(|r| r.len() != n)
    {
        return bad(format!("table dimensions do not match {n} tasks and {m} modes"));
    }
    if table.mode_deadlines_ns != map.mode_deadlines {
        return bad("table and deadline map disagree on mode deadlines".into());
    }
    if table.periods_ns.iter().flatten().any(|&p| p == 0) {
        return bad("zero period".into());
    }
    if table.speeds.iter().flatten().any(|&s| !(s > 0.0 && s <= 1.0)) {
        return bad("speed outside (0, 1]".into());
    }
    Ok(())
}

/// Runs one scenario through the task graph under a mode table.
pub fn simulate(
    graph: &TaskGraph,
    table: &ModeTable,
    map: &DeadlineMap,
    scenario: &Scenario,
    options: &SimOptions,
) -> Result<SimTrace, SimError> {
    consistency(graph, table, map)?;
    let horizon = options.horizon_ns.unwrap_or_else(|| scenario.end());
    if horizon > scenario.end() {
        return Err(SimError::ScenarioTooShort { horizon_ns: horizon, scenario_end_ns: scenario.end() });
    }
    let paths = graph.enumerate_paths().map_err(|e| SimError::InconsistentTable(e.to_string()))?;
    let delays = DelayMatrix::new(table, &paths).map_err(|e| SimError::InconsistentTable(e.to_string()))?;
    let mut sim = Sim::new(graph, table, map, scenario, options, delays, horizon);
    sim.run(horizon);
    Ok(sim.trace)
}

impl<'a> Sim<'a> {
    fn new(
        graph: &'a TaskGraph,
        table: &'a ModeTable,
        map: &'a DeadlineMap,
        scenario: &'a Scenario,
        opts: &'a SimOptions,
        delays: DelayMatrix,
        horizon: Nanos,
    ) -> Self {
        let n = graph.len();
        let sources = graph.sources();
        let sinks = graph.sinks();
        let reach = graph.reachability();
        let mut source_idx = vec![None; n];
        for (k, &s) in sources.iter().enumerate() {
            source_idx[s] = Some(k);
        }
        let mut in_edges = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        for (e, &(u, v)) in graph.edges().iter().enumerate() {
            out_edges[u].push(e);
            in_edges[v].push(e);
        }
        let relevant = sources
            .iter()
            .map(|&s| {
                (0..n)
                    .map(|t| {
                        in_edges[t]
                            .iter()
                            .copied()
                            .filter(|&e| {
                                let u = graph.edges()[e].0;
                                u == s || reach[s][u]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut flows = Vec::new();
        for (k, &s) in sources.iter().enumerate() {
            for &a in &sinks {
                if s == a || reach[s][a] {
                    flows.push(Flow { source_idx: k, source: s, sink: a, queue: VecDeque::new() });
                }
            }
        }
        let v0 = scenario.velocity_at(0);
        let target = map.deadline_from_velocity(v0).map(|d| map.select_mode(d)).unwrap_or(0);
        let tasks = (0..n)
            .map(|_| TaskState {
                mode: target,
                next_release: 0,
                last_release: None,
                pending: None,
                history: vec![(0, target)],
                last_sample: None,
            })
            .collect();
        let trace = SimTrace {
            horizon_ns: horizon,
            flows: flows.iter().map(|f| (f.source, f.sink)).collect(),
            segments: Vec::new(),
            events: Vec::new(),
            reactions: Vec::new(),
            deadline_misses: Vec::new(),
            energy: Energy::default(),
            busy_ns: 0,
            mode_residency_ns: vec![0; table.mode_count()],
            jobs_released: 0,
            jobs_completed: 0,
            out_of_range_decisions: 0,
        };
        Sim {
            graph,
            table,
            map,
            scenario,
            opts,
            delays,
            n_sources: sources.len(),
            source_idx,
            relevant,
            in_edges,
            out_edges,
            buffers: vec![None; graph.edges().len()],
            tasks,
            jobs: Vec::new(),
            flows,
            target,
            epoch: 0,
            decided_at: None,
            next_seq: 0,
            last_segment_seq: None,
            trace,
        }
    }

    fn run(&mut self, horizon: Nanos) {
        let p = self.opts.power;
        let busy_power = |s: f64| p.alpha * s.powf(p.gamma);
        let idle_power = p.alpha * p.s_min.powf(p.gamma);
        let mut now: Nanos = 0;
        loop {
            self.release_due(now);
            let pick = self.pick();
            let mut next = horizon;
            if let Some(t) = self.tasks.iter().map(|t| t.next_release).min() {
                next = next.min(t);
            }
            if let Some(j) = pick {
                next = next.min(now + self.jobs[j].remaining);
            }
            let dt = next - now;
            let secs = ns_to_s(dt);
            self.trace.energy.static_ += p.beta * secs;
            self.trace.mode_residency_ns[self.target] += dt;
            match pick {
                Some(j) if dt > 0 => {
                    let job = &mut self.jobs[j];
                    job.remaining -= dt;
                    self.trace.energy.busy_dynamic += busy_power(job.speed) * secs;
                    self.trace.busy_ns += dt;
                    if self.opts.record_segments {
                        let extend = self.last_segment_seq == Some(job.seq)
                            && self.trace.segments.last().is_some_and(|s| s.end_ns == now);
                        if extend {
                            self.trace.segments.last_mut().unwrap().end_ns = next;
                        } else {
                            self.trace.segments.push(Segment {
                                task: job.task,
                                start_ns: now,
                                end_ns: next,
                                speed: job.speed,
                            });
                        }
                        self.last_segment_seq = Some(job.seq);
                    }
                }
                _ => self.trace.energy.idle_dynamic += idle_power * secs,
            }
            now = next;
            if let Some(j) = pick {
                if self.jobs[j].remaining == 0 {
                    let job = self.jobs.swap_remove(j);
                    self.complete(job, now);
                }
            }
            if now >= horizon {
                break;
            }
        }
        for job in &self.jobs {
            if job.deadline <= horizon {
                self.trace.deadline_misses.push(DeadlineMiss {
                    task: job.task,
                    release_ns: job.release,
                    deadline_ns: job.deadline,
                    finish_ns: None,
                });
            }
        }
        self.trace.deadline_misses.sort_by_key(|m| (m.deadline_ns, m.task));
    }

    /// Earliest deadline first; ties by task index, then release.
    fn pick(&self) -> Option<usize> {
        (0..self.jobs.len()).min_by_key(|&j| {
            let job = &self.jobs[j];
            (job.deadline, job.task, job.release)
        })
    }

    fn complete(&mut self, job: Job, now: Nanos) {
        self.trace.jobs_completed += 1;
        if now > job.deadline {
            self.trace.deadline_misses.push(DeadlineMiss {
                task: job.task,
                release_ns: job.release,
                deadline_ns: job.deadline,
                finish_ns: Some(now),
            });
        }
        for &e in &self.out_edges[job.task] {
            self.buffers[e] = Some(job.stamp.clone());
        }
        for f in 0..self.flows.len() {
            if self.flows[f].sink != job.task {
                continue;
            }
            let Some(reflected) = job.stamp.prov[self.flows[f].source_idx] else { continue };
            while self.flows[f].queue.front().is_some_and(|s| s.read <= reflected) {
                let s = self.flows[f].queue.pop_front().unwrap();
                let guaranteed = self.map.mode_deadlines[s.mode];
                let allowed = self.allowed_delay(s.t1, now, s.mode).max(guaranteed);
                self.trace.reactions.push(ReactionSample {
                    source: self.flows[f].source,
                    sink: self.flows[f].sink,
                    t1_ns: s.t1,
                    read_ns: s.read_ns,
                    t2_ns: now,
                    mode: s.mode,
                    guaranteed_ns: guaranteed,
                    allowed_ns: allowed,
                    required_ns: s.required,
                });
            }
        }
    }

    /// Largest analyzed delay into `mode` from any mode some task was in
    /// during `[t1, t2]`.
    fn allowed_delay(&self, t1: Nanos, t2: Nanos, mode: usize) -> Nanos {
        let mut worst = 0;
        for task in &self.tasks {
            let h = &task.history;
            let first = h.partition_point(|&(t, _)| t <= t1).saturating_sub(1);
            for &(t, m) in &h[first..] {
                if t > t2 {
                    break;
                }
                worst = worst.max(self.delays.get(m, mode));
            }
        }
        worst
    }

    fn release_due(&mut self, now: Nanos) {
        let due: Vec<usize> = (0..self.tasks.len()).filter(|&i| self.tasks[i].next_release == now).collect();
        if due.is_empty() {
            return;
        }
        if due.iter().any(|&i| self.source_idx[i].is_some()) && self.decided_at != Some(now) {
            self.decide(now);
        }
        for &i in &due {
            self.maybe_switch(i, now);
        }
        self.check_event_completion(now);
        for &i in &due {
            self.release(i, now);
        }
    }

    fn decide(&mut self, now: Nanos) {
        self.decided_at = Some(now);
        let d = self.map.deadline_from_velocity(self.scenario.velocity_at(now)).unwrap_or(0);
        if d < self.map.mode_deadlines[0] {
            self.trace.out_of_range_decisions += 1;
        }
        let j = self.map.select_mode(d);
        if j == self.target {
            return;
        }
        self.epoch += 1;
        if let Some(last) = self.trace.events.last_mut() {
            if last.completion_ns.is_none() {
                last.superseded = true;
            }
        }
        let protocol = if j > self.target { self.opts.relaxing } else { self.opts.shrinking };
        self.trace.events.push(ModeChangeEvent {
            trigger_ns: now,
            from_mode: self.target,
            to_mode: j,
            protocol,
            epoch: self.epoch,
            completion_ns: None,
            superseded: false,
        });
        self.target = j;
        let epoch = self.epoch;
        for t in &mut self.tasks {
            t.pending = (t.mode != j).then_some(Pending { target: j, epoch });
        }
    }

    fn maybe_switch(&mut self, i: usize, now: Nanos) {
        let Some(p) = self.tasks[i].pending else { return };
        let protocol = if p.target > self.tasks[i].mode { self.opts.relaxing } else { self.opts.shrinking };
        let go = match protocol {
            Protocol::Aeap => true,
            Protocol::Alap => {
                self.source_idx[i].is_some()
                    || self.in_edges[i]
                        .iter()
                        .all(|&e| self.buffers[e].as_ref().is_some_and(|s| s.epoch >= p.epoch))
            }
        };
        if go {
            let t = &mut self.tasks[i];
            t.mode = p.target;
            t.pending = None;
            t.history.push((now, p.target));
        }
    }

    fn check_event_completion(&mut self, now: Nanos) {
        let Some(last) = self.trace.events.last_mut() else { return };
        if last.completion_ns.is_none() && self.tasks.iter().all(|t| t.mode == self.target) {
            last.completion_ns = Some(now);
        }
    }

    fn release(&mut self, i: usize, now: Nanos) {
        let mode = self.tasks[i].mode;
        let period = self.table.periods_ns[mode][i];
        let speed = self.table.speeds[mode][i];
        let stamp = match self.source_idx[i] {
            Some(k) => {
                let (read, t1) = match self.opts.sensor_sampling {
                    SensorSampling::WorstCase => (now, self.tasks[i].last_release.unwrap_or(now)),
                    SensorSampling::Periodic { period_ns } => {
                        let s = now / period_ns * period_ns;
                        (s, s)
                    }
                };
                if self.tasks[i].last_sample != Some(read) {
                    self.tasks[i].last_sample = Some(read);
                    let v = self.scenario.velocity_at(t1);
                    let required = self.map.deadline_from_velocity(v).unwrap_or(0);
                    for f in self.flows.iter_mut().filter(|f| f.source == i) {
                        f.queue.push_back(InFlight { read, t1, read_ns: now, mode: self.target, required });
                    }
                }
                let mut prov = vec![None; self.n_sources];
                prov[k] = Some(read);
                Stamp { prov, epoch: self.epoch }
            }
            None => self.combine_inputs(i),
        };
        let exec = (self.graph.wcet_ns(i) as f64 / speed).ceil() as Nanos;
        self.jobs.push(Job {
            task: i,
            seq: self.next_seq,
            release: now,
            deadline: now + period,
            remaining: exec.max(1),
            speed,
            stamp,
        });
        self.next_seq += 1;
        self.trace.jobs_released += 1;
        let t = &mut self.tasks[i];
        t.last_release = Some(now);
        t.next_release = now + period;
    }

    fn combine_inputs(&self, i: usize) -> Stamp {
        let prov = (0..self.n_sources)
            .map(|s| {
                let edges = &self.relevant[s][i];
                if edges.is_empty() {
                    return None;
                }
                edges.iter().try_fold(Nanos::MAX, |acc, &e| {
                    self.buffers[e].as_ref().and_then(|b| b.prov[s]).map(|p| acc.min(p))
                })
            })
            .collect();
        let epoch = self.in_edges[i]
            .iter()
            .map(|&e| self.buffers[e].as_ref().map_or(0, |b| b.epoch))
            .min()
            .unwrap_or(self.epoch);
        Stamp { prov, epoch }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TaskSpec;
    use crate::power::PowerParams;
    use crate::time::{NS_PER_MS, NS_PER_S};

    fn one_task(e_ms: u64, p_ms: u64) -> (TaskGraph, ModeTable, DeadlineMap) {
        let g = TaskGraph::new(vec![TaskSpec { name: "a".into(), wcet_ns: e_ms * NS_PER_MS }], vec![]).unwrap();
        let table = ModeTable {
            mode_deadlines_ns: vec![2 * p_ms * NS_PER_MS],
            periods_ns: vec![vec![p_ms * NS_PER_MS]],
            speeds: vec![vec![1.0]],
            utilizations: vec![e_ms as f64 / p_ms as f64],
            quantized: false,
        };
        let map = DeadlineMap::with_modes(20.0, 2.5, 10 * NS_PER_S, table.mode_deadlines_ns.clone()).unwrap();
        (g, table, map)
    }

    fn unit_power() -> PowerParams {
        PowerParams { alpha: 1.0, beta: 0.0, gamma: 3.0, s_min: 0.5 }
    }

    #[test]
    fn single_task_reaction() {
        let (g, table, map) = one_task(1, 2);
        let sc = Scenario::new("c", vec![(0, 0.0), (NS_PER_S, 0.0)]).unwrap();
        let mut opts = SimOptions::new(unit_power());
        opts.horizon_ns = Some(10 * NS_PER_MS);
        let tr = simulate(&g, &table, &map, &sc, &opts).unwrap();
        // Sample arriving just after t=0 is read at t=2 and output at t=3.
        let r = tr.reactions.iter().find(|r| r.read_ns == 2 * NS_PER_MS).unwrap();
        assert_eq!(r.t1_ns, 0);
        assert_eq!(r.t2_ns, 3 * NS_PER_MS);
        assert!(r.delay_ns() <= 4 * NS_PER_MS);
        assert!(tr.deadline_misses.is_empty());
        assert_eq!(tr.busy_ns, 5 * NS_PER_MS);
    }

    #[test]
    fn empty_graph_idles() {
        let g = TaskGraph::new(vec![], vec![]).unwrap();
        let table = ModeTable {
            mode_deadlines_ns: vec![NS_PER_S],
            periods_ns: vec![vec![]],
            speeds: vec![vec![]],
            utilizations: vec![],
            quantized: false,
        };
        let map = DeadlineMap::with_modes(20.0, 2.5, 10 * NS_PER_S, vec![NS_PER_S]).unwrap();
        let sc = Scenario::new("c", vec![(0, 0.0), (NS_PER_S, 0.0)]).unwrap();
        let tr = simulate(&g, &table, &map, &sc, &SimOptions::new(unit_power())).unwrap();
        assert!((tr.energy.total() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn horizon_beyond_scenario() {
        let (g, table, map) = one_task(1, 2);
        let sc = Scenario::new("c", vec![(0, 0.0), (NS_PER_S, 0.0)]).unwrap();
        let mut opts = SimOptions::new(unit_power());
        opts.horizon_ns = Some(2 * NS_PER_S);
        assert!(matches!(simulate(&g, &table, &map, &sc, &opts), Err(SimError::ScenarioTooShort { .. })));
    }

    #[test]
    fn inconsistent_table() {
        let (g, mut table, map) = one_task(1, 2);
        table.speeds[0].push(1.0);
        let sc = Scenario::new("c", vec![(0, 0.0), (NS_PER_S, 0.0)]).unwrap();
        assert!(matches!(
            simulate(&g, &table, &map, &sc, &SimOptions::new(unit_power())),
            Err(SimError::InconsistentTable(_))
        ));
    }

    #[test]
    fn overload_misses_deadlines() {
        let g = TaskGraph::new(
            vec![TaskSpec { name: "a".into(), wcet_ns: 3 * NS_PER_MS }, TaskSpec { name: "b".into(), wcet_ns: 3 * NS_PER_MS }],
            vec![(0, 1)],
        )
        .unwrap();
        let table = ModeTable {
            mode_deadlines_ns: vec![20 * NS_PER_MS],
            periods_ns: vec![vec![4 * NS_PER_MS, 4 * NS_PER_MS]],
            speeds: vec![vec![1.0, 1.0]],
            utilizations: vec![0.75, 0.75],
            quantized: false,
        };
        let map = DeadlineMap::with_modes(20.0, 2.5, 10 * NS_PER_S, vec![20 * NS_PER_MS]).unwrap();
        let sc = Scenario::new("c", vec![(0, 0.0), (NS_PER_S, 0.0)]).unwrap();
        let mut opts = SimOptions::new(unit_power());
        opts.horizon_ns = Some(100 * NS_PER_MS);
        let tr = simulate(&g, &table, &map, &sc, &opts).unwrap();
        assert!(!tr.deadline_misses.is_empty());
    }
}
