// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Periodic task sets with read-write dependencies.
//!
//! Tasks are addressed by a zero-based index internally. The JSON file
//! format and all human-readable output use one-based ids, so task `0` is
//! printed as `1`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::Nanos;

const WATERS_JSON: &str = include_str!("../data/waters.json");

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("task {id} has a non-positive WCET")]
    ZeroWcet { id: usize },
    #[error("edge references unknown task {0}")]
    UnknownTask(String),
    #[error("self-edge on task {id}")]
    SelfEdge { id: usize },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("edge list forms a cycle through task {id}")]
    CycleDetected { id: usize },
    #[error("task {id} ({name}) lies on no source-to-sink path")]
    OrphanTask { id: usize, name: String },
    #[error("failed to read task graph: {0}")]
    Io(String),
    #[error("malformed task graph JSON: {0}")]
    Json(String),
}

/// A periodic task: only its worst-case execution time at full speed is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub wcet_ns: Nanos,
}

/// An ordered list of task indices from a source to a sink.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn tasks(&self) -> &[usize] {
        &self.0
    }

    pub fn source(&self) -> usize {
        self.0[0]
    }

    pub fn sink(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// One-based ids, as shown to users.
    pub fn ids(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i + 1).collect()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.ids().iter().map(|i| i.to_string()).collect();
        write!(f, "{}", ids.join("->"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskGraph {
    tasks: Vec<TaskSpec>,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    successors: Vec<Vec<usize>>,
    #[serde(skip)]
    predecessors: Vec<Vec<usize>>,
}

/// Result of [`TaskGraph::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub task_count: usize,
    pub edge_count: usize,
    /// One-based ids of tasks with no incoming edge.
    pub sources: Vec<usize>,
    /// One-based ids of tasks with no outgoing edge.
    pub sinks: Vec<usize>,
    pub flow_count: usize,
    pub path_count: usize,
    pub topological_order: Vec<usize>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "task graph: valid (acyclic, every task on a source-to-sink path)")?;
        writeln!(f, "  tasks:   {}", self.task_count)?;
        writeln!(f, "  edges:   {}", self.edge_count)?;
        writeln!(f, "  sources: {:?} (n_s = {})", self.sources, self.sources.len())?;
        writeln!(f, "  sinks:   {:?} (n_a = {})", self.sinks, self.sinks.len())?;
        writeln!(f, "  flows:   {}", self.flow_count)?;
        write!(f, "  paths:   {}", self.path_count)
    }
}

#[derive(Deserialize)]
struct GraphFile {
    tasks: Vec<TaskSpec>,
    #[serde(default)]
    edges: Vec<(EdgeEnd, EdgeEnd)>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EdgeEnd {
    Id(usize),
    Name(String),
}

#[derive(Serialize)]
struct GraphFileOut<'a> {
    tasks: &'a [TaskSpec],
    edges: Vec<(usize, usize)>,
}

impl TaskGraph {
    /// Builds a graph from tasks and zero-based `(producer, consumer)` edges.
    ///
    /// Only structural checks happen here; acyclicity and reachability are
    /// checked by [`TaskGraph::validate`].
    pub fn new(tasks: Vec<TaskSpec>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let n = tasks.len();
        for (i, t) in tasks.iter().enumerate() {
            if t.wcet_ns == 0 {
                return Err(GraphError::ZeroWcet { id: i + 1 });
            }
        }
        let mut seen = BTreeSet::new();
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        for &(from, to) in &edges {
            if from >= n {
                return Err(GraphError::UnknownTask((from + 1).to_string()));
            }
            if to >= n {
                return Err(GraphError::UnknownTask((to + 1).to_string()));
            }
            if from == to {
                return Err(GraphError::SelfEdge { id: from + 1 });
            }
            if !seen.insert((from, to)) {
                return Err(GraphError::DuplicateEdge { from: from + 1, to: to + 1 });
            }
            successors[from].push(to);
            predecessors[to].push(from);
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
        }
        Ok(TaskGraph { tasks, edges, successors, predecessors })
    }

    /// Parses the JSON graph format and validates the result.
    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        let resolve = |end: &EdgeEnd| -> Result<usize, GraphError> {
            match end {
                EdgeEnd::Id(id) if *id >= 1 && *id <= file.tasks.len() => Ok(id - 1),
                EdgeEnd::Id(id) => Err(GraphError::UnknownTask(id.to_string())),
                EdgeEnd::Name(name) => file
                    .tasks
                    .iter()
                    .position(|t| &t.name == name)
                    .ok_or_else(|| GraphError::UnknownTask(name.clone())),
            }
        };
        let edges = file
            .edges
            .iter()
            .map(|(a, b)| Ok((resolve(a)?, resolve(b)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        let graph = TaskGraph::new(file.tasks.clone(), edges)?;
        graph.validate()?;
        Ok(graph)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| GraphError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        let out = GraphFileOut {
            tasks: &self.tasks,
            edges: self.edges.iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
        };
        serde_json::to_string_pretty(&out).expect("graph serializes")
    }

    /// The ten-task autonomous driving reference graph, WCETs in nanoseconds.
    pub fn waters() -> Self {
        Self::from_json_str(WATERS_JSON).expect("bundled graph is valid")
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn task(&self, idx: usize) -> &TaskSpec {
        &self.tasks[idx]
    }

    pub fn wcet_ns(&self, idx: usize) -> Nanos {
        self.tasks[idx].wcet_ns
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.successors[idx]
    }

    pub fn predecessors(&self, idx: usize) -> &[usize] {
        &self.predecessors[idx]
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.predecessors[i].is_empty()).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.successors[i].is_empty()).collect()
    }

    /// Kahn's algorithm; smallest ready index first so the order is stable.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.predecessors.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(next) = ready.pop_first() {
            order.push(next);
            for &succ in &self.successors[next] {
                indegree[succ] -= 1;
                if indegree[succ] == 0 {
                    ready.insert(succ);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
            return Err(GraphError::CycleDetected { id: stuck + 1 });
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<ValidationReport, GraphError> {
        let order = self.topological_order()?;
        // In a DAG every task with at least one edge reaches a source
        // backwards and a sink forwards; only isolated tasks in a larger
        // graph sit on no sensor-to-actuator path.
        if self.len() > 1 {
            if let Some(i) = (0..self.len())
                .find(|&i| self.predecessors[i].is_empty() && self.successors[i].is_empty())
            {
                return Err(GraphError::OrphanTask { id: i + 1, name: self.tasks[i].name.clone() });
            }
        }
        let sources = self.sources();
        let sinks = self.sinks();
        let paths = self.paths_unchecked();
        Ok(ValidationReport {
            task_count: self.len(),
            edge_count: self.edges.len(),
            flow_count: sources.len() * sinks.len(),
            sources: sources.iter().map(|i| i + 1).collect(),
            sinks: sinks.iter().map(|i| i + 1).collect(),
            path_count: paths.len(),
            topological_order: order.iter().map(|i| i + 1).collect(),
        })
    }

    /// Every source-to-sink path exactly once, sorted lexicographically by
    /// task-id sequence.
    pub fn enumerate_paths(&self) -> Result<Vec<Path>, GraphError> {
        self.validate()?;
        Ok(self.paths_unchecked())
    }

    fn paths_unchecked(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for src in self.sources() {
            stack.push(src);
            self.extend_paths(&mut stack, &mut out);
            stack.pop();
        }
        out.sort();
        out
    }

    fn extend_paths(&self, stack: &mut Vec<usize>, out: &mut Vec<Path>) {
        let last = *stack.last().expect("non-empty stack");
        if self.successors[last].is_empty() {
            out.push(Path(stack.clone()));
            return;
        }
        for &next in &self.successors[last] {
            stack.push(next);
            self.extend_paths(stack, out);
            stack.pop();
        }
    }

    /// `reach[a][b]` is true when `b` is reachable from `a` (or `a == b`).
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut reach = vec![vec![false; n]; n];
        let order = self.topological_order().unwrap_or_else(|_| (0..n).collect());
        for &v in order.iter().rev() {
            reach[v][v] = true;
            for &s in &self.successors[v] {
                for t in 0..n {
                    if reach[s][t] {
                        reach[v][t] = true;
                    }
                }
            }
        }
        reach
    }
}
