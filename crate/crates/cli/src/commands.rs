// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use dyndl_core::modechange::{matrix_csv, transition_matrix, DelayMatrix, Direction};
use dyndl_core::optimizer::{multi_mode_problem, optimize_multi_mode, Method, ModeTable};
use dyndl_core::scenario::SynthKind;
use dyndl_core::time::{ns_to_ms, s_to_ns};
use dyndl_core::{Scenario, TaskGraph};
use serde::Serialize;

use crate::context::{table_name, Context};
use crate::svg;
use crate::Precision;

pub fn optimize(ctx: &Context, precision: Precision) -> Result<bool> {
    let graph = ctx.graph()?;
    let map = ctx.deadline_map(&graph)?;
    let tables = ctx.tables(&graph, &map)?;
    let gamma = ctx.config.power.gamma;

    let mut columns: Vec<(String, ModeTable)> = Vec::new();
    for &method in &ctx.config.methods {
        for quantized in precision.selected(&[false, true]) {
            let table = ctx.table(&tables, method, quantized)?;
            let name = table_name(method, quantized);
            ctx.write_json(format!("tables/{name}.json"), &table)?;
            columns.push((name, table));
        }
    }

    let mut csv = String::from("mode,deadline_ms");
    for (name, _) in &columns {
        let _ = write!(csv, ",{name}_pct");
    }
    csv.push('\n');
    for (j, &d) in map.mode_deadlines.iter().enumerate() {
        let _ = write!(csv, "{},{}", j + 1, ns_to_ms(d));
        for (_, table) in &columns {
            let _ = write!(csv, ",{:.4}", 100.0 * table.normalized_dynamic_power(j, &graph, gamma));
        }
        csv.push('\n');
    }
    ctx.write("power_per_mode.csv", &csv)?;
    let categories: Vec<String> = (1..=map.mode_count()).map(|j| j.to_string()).collect();
    let series: Vec<(String, Vec<f64>)> = columns
        .iter()
        .map(|(name, t)| (name.clone(), (0..t.mode_count()).map(|j| 100.0 * t.normalized_dynamic_power(j, &graph, gamma)).collect()))
        .collect();
    ctx.write(
        "power_per_mode.svg",
        svg::grouped_bars("Normalized dynamic power per mode", "% of full-speed dynamic power", &categories, &series),
    )?;

    if ctx.gp_debug {
        write_gp_debug(ctx, &graph, &map.mode_deadlines)?;
    }
    ctx.write_metadata()?;
    print!("{csv}");
    Ok(true)
}

fn write_gp_debug(ctx: &Context, graph: &TaskGraph, deadlines: &[u64]) -> Result<()> {
    #[derive(Serialize)]
    struct Dump<T: Serialize, L: Serialize> {
        convex_form: T,
        objective: f64,
        iterations: L,
    }
    let paths = graph.enumerate_paths()?;
    let problem = multi_mode_problem(graph, &ctx.config.power, &paths, deadlines);
    let sol = optimize_multi_mode(graph, &ctx.config.power, deadlines, &ctx.solver)?;
    ctx.write_json("gp_debug.json", &Dump { convex_form: problem.convex_form(), objective: sol.objective, iterations: sol.log })?;
    Ok(())
}

#[derive(Serialize)]
struct TransitionSummary {
    modes: usize,
    transitions: usize,
    relaxing: usize,
    shrinking: usize,
    /// Smallest `deadline - worst delay` over relaxing transitions.
    worst_relaxing_margin_ns: Option<i64>,
    /// Same over shrinking transitions; negative values are the transient
    /// overshoot the switch may cause.
    worst_shrinking_margin_ns: Option<i64>,
    negative_relaxing_margins: usize,
}

pub fn analyze(ctx: &Context, table_path: Option<&Path>, method: Method, precision: Precision) -> Result<bool> {
    let graph = ctx.graph()?;
    let table: ModeTable = match table_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing mode table {}", path.display()))?
        }
        None => {
            let map = ctx.deadline_map(&graph)?;
            let tables = ctx.tables(&graph, &map)?;
            ctx.table(&tables, method, precision.selected(&[false])[0])?
        }
    };
    if table.task_count() != graph.len() {
        bail!("mode table has {} tasks, the task graph {}", table.task_count(), graph.len());
    }
    let paths = graph.enumerate_paths()?;
    let entries = transition_matrix(&table, &paths)?;
    ctx.write("transitions.csv", matrix_csv(&entries))?;

    let delays = DelayMatrix::new(&table, &paths)?;
    let m = table.mode_count();
    let mut csv = String::from("from_mode");
    for j in 1..=m {
        let _ = write!(csv, ",to_{j}_ns");
    }
    csv.push('\n');
    for a in 0..m {
        let _ = write!(csv, "{}", a + 1);
        for b in 0..m {
            let _ = write!(csv, ",{}", delays.get(a, b));
        }
        csv.push('\n');
    }
    ctx.write("delay_matrix.csv", csv)?;

    let worst = |dir: Direction| entries.iter().filter(|e| e.direction == dir).map(|e| e.margin_ns).min();
    let summary = TransitionSummary {
        modes: m,
        transitions: entries.len(),
        relaxing: entries.iter().filter(|e| e.direction == Direction::Relaxing).count(),
        shrinking: entries.iter().filter(|e| e.direction == Direction::Shrinking).count(),
        worst_relaxing_margin_ns: worst(Direction::Relaxing),
        worst_shrinking_margin_ns: worst(Direction::Shrinking),
        negative_relaxing_margins: entries.iter().filter(|e| e.direction == Direction::Relaxing && e.margin_ns < 0).count(),
    };
    ctx.write_json("transition_summary.json", &summary)?;
    ctx.write_metadata()?;
    let fmt = |v: Option<i64>| v.map(|ns| format!("{:.3} ms", ns as f64 / 1e6)).unwrap_or_else(|| "n/a".into());
    println!(
        "{} modes, {} transitions ({} relaxing, {} shrinking); worst relaxing margin {}, worst shrinking margin {}",
        summary.modes,
        summary.transitions,
        summary.relaxing,
        summary.shrinking,
        fmt(summary.worst_relaxing_margin_ns),
        fmt(summary.worst_shrinking_margin_ns)
    );
    Ok(summary.negative_relaxing_margins == 0)
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Shape {
    Constant,
    Ramp,
    Square,
    Random,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Shape,
    /// Constant velocity, or ramp start (m/s).
    #[arg(long, default_value_t = 10.0)]
    v: f64,
    /// Ramp end (m/s).
    #[arg(long, default_value_t = 30.0)]
    v2: f64,
    #[arg(long, default_value_t = 8.0)]
    v_lo: f64,
    #[arg(long, default_value_t = 30.0)]
    v_hi: f64,
    /// Square-wave period (s).
    #[arg(long, default_value_t = 20.0)]
    period_s: f64,
    /// Seed of the random drive.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 31.6)]
    v_max: f64,
    #[arg(long, default_value_t = 2.5)]
    a_max: f64,
    #[arg(long, default_value_t = 60.0)]
    duration_s: f64,
    /// Output CSV [default: <out>/scenario-<kind>.csv]
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn synth_scenario(ctx: &Context, args: &SynthArgs) -> Result<bool> {
    let kind = match args.kind {
        Shape::Constant => SynthKind::Constant { v: args.v },
        Shape::Ramp => SynthKind::Ramp { v1: args.v, v2: args.v2, duration_s: args.duration_s },
        Shape::Square => SynthKind::Square { v_lo: args.v_lo, v_hi: args.v_hi, period_s: args.period_s },
        Shape::Random => SynthKind::RandomDrive { seed: args.seed, v_max: args.v_max, a_max: args.a_max },
    };
    if !(args.duration_s > 0.0) {
        bail!("duration must be positive");
    }
    let scenario = Scenario::synthesize(&kind, s_to_ns(args.duration_s))?;
    let path = match &args.output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, scenario.to_csv_string()).with_context(|| format!("writing {}", p.display()))?;
            p.clone()
        }
        None => ctx.write(format!("scenario-{kind}.csv"), scenario.to_csv_string())?,
    };
    println!("{} samples over {:.1} s -> {}", scenario.samples().len(), args.duration_s, path.display());
    Ok(true)
}

pub fn validate(ctx: &Context, graph_path: Option<&Path>) -> Result<bool> {
    let graph = match graph_path {
        Some(p) => TaskGraph::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ctx.graph()?,
    };
    let report = graph.validate()?;
    println!("{report}");
    if graph_path.is_none() {
        let scenarios = ctx.config.load_scenarios()?;
        for s in &scenarios {
            println!("scenario {}: {} samples, {:.1} s", s.name, s.samples().len(), (s.end() - s.start()) as f64 / 1e9);
        }
        println!("configuration ok: {} modes, methods {:?}", ctx.config.deadline_map.mode_count, ctx.config.methods);
    }
    ctx.write_json("validation.json", &report)?;
    ctx.write_metadata()?;
    Ok(true)
}
