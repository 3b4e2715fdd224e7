// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context as _, Result};
use dyndl_core::modechange::DelayMatrix;
use dyndl_core::optimizer::{Method, ModeTable};
use dyndl_core::sim::{export, simulate, summarize, Report};
use dyndl_core::time::{ns_to_ms, ns_to_s, Nanos, NS_PER_MS};
use dyndl_core::{DeadlineMap, PowerParams, Scenario, SimTrace, TaskGraph};

use crate::context::{table_name, Context};
use crate::svg::{self, Panel, Series};
use crate::Precision;

const TIMELINE_BIN_NS: Nanos = 100 * NS_PER_MS;

fn scenarios(ctx: &Context, explicit: &[PathBuf]) -> Result<Vec<Scenario>> {
    let paths = if explicit.is_empty() { ctx.config.scenario_paths() } else { explicit.to_vec() };
    if paths.is_empty() {
        bail!("no scenarios: pass --scenario or list them in the configuration");
    }
    let out: Vec<Scenario> = paths.iter().map(|p| ctx.config.load_scenario(p)).collect::<Result<_, _>>()?;
    let mut names: Vec<&str> = out.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        bail!("scenario file names must be distinct");
    }
    Ok(out)
}

fn status_line(name: &str, r: &Report) -> String {
    format!(
        "{name}: energy {:.1} ({:+.1}% vs baseline), {} mode changes, {} violations, {} transient, {} deadline misses",
        r.total_energy,
        100.0 * (r.energy_ratio - 1.0),
        r.mode_changes,
        r.violations,
        r.transient_exceedances,
        r.deadline_misses
    )
}

pub fn simulate_cmd(ctx: &Context, explicit: &[PathBuf], method: Method, precision: Precision) -> Result<bool> {
    let graph = ctx.graph()?;
    let map = ctx.deadline_map(&graph)?;
    let tables = ctx.tables(&graph, &map)?;
    let quantized = precision.selected(&[false])[0];
    let table = ctx.table(&tables, method, quantized)?;
    let mut opts = ctx.config.sim_options();
    opts.record_segments = true;
    let mut clean = true;
    for sc in scenarios(ctx, explicit)? {
        let trace = simulate(&graph, &table, &map, &sc, &opts).with_context(|| format!("simulating {}", sc.name))?;
        let baseline = simulate(&graph, &tables.baseline, &map, &sc, &opts)?;
        let report = summarize(&trace, &ctx.config.power, &baseline)?;
        let dir = ctx.out.join("simulate").join(&sc.name);
        export::write_all(&dir, &trace, &report).with_context(|| format!("writing {}", dir.display()))?;
        let (csv, plot) = timeline(&graph, &table, &map, &sc, &trace, &ctx.config.power)?;
        ctx.write(dir.join("timeline.csv"), csv)?;
        ctx.write(dir.join("timeline.svg"), plot)?;
        println!("{}", status_line(&format!("{} [{}]", sc.name, table_name(method, quantized)), &report));
        clean &= report.is_clean();
    }
    ctx.write_metadata()?;
    Ok(clean)
}

/// Per-bin velocity, required deadline, guaranteed deadline, admitted
/// transition delay and average power, as CSV and a two-panel plot.
fn timeline(
    graph: &TaskGraph,
    table: &ModeTable,
    map: &DeadlineMap,
    sc: &Scenario,
    trace: &SimTrace,
    power: &PowerParams,
) -> Result<(String, String)> {
    let paths = graph.enumerate_paths()?;
    let delays = DelayMatrix::new(table, &paths)?;
    let bins = trace.horizon_ns.div_ceil(TIMELINE_BIN_NS) as usize;
    let mut busy = vec![0.0f64; bins];
    let mut busy_ns = vec![0u64; bins];
    for s in &trace.segments {
        let mut t = s.start_ns;
        while t < s.end_ns {
            let b = (t / TIMELINE_BIN_NS) as usize;
            let end = s.end_ns.min((b as Nanos + 1) * TIMELINE_BIN_NS);
            busy[b] += power.alpha * s.speed.powf(power.gamma) * (end - t) as f64;
            busy_ns[b] += end - t;
            t = end;
        }
    }
    let initial = map.mode_for_velocity(sc.velocity_at(0))?;
    let mut csv = String::from("t_s,velocity_mps,required_ms,guaranteed_ms,allowed_ms,power\n");
    let mut series: [Vec<(f64, f64)>; 4] = Default::default();
    for b in 0..bins {
        let t = b as Nanos * TIMELINE_BIN_NS;
        let len = (trace.horizon_ns - t).min(TIMELINE_BIN_NS);
        let v = sc.velocity_at(t);
        let required = ns_to_ms(map.deadline_from_velocity(v)?);
        let current = trace.events.iter().take_while(|e| e.trigger_ns <= t).last();
        let mode = current.map_or(initial, |e| e.to_mode);
        let guaranteed = ns_to_ms(table.mode_deadlines_ns[mode]);
        let allowed = match current {
            Some(e) if e.completion_ns.is_none_or(|c| c > t) => ns_to_ms(delays.get(e.from_mode, e.to_mode)),
            _ => guaranteed,
        };
        let idle = (len - busy_ns[b]) as f64 * power.alpha * power.s_min.powf(power.gamma);
        let avg = power.beta + (busy[b] + idle) / len as f64;
        let ts = ns_to_s(t);
        let _ = writeln!(csv, "{ts:.1},{v:.4},{required:.3},{guaranteed:.3},{allowed:.3},{avg:.3}");
        for (k, y) in [required, guaranteed, allowed, avg].into_iter().enumerate() {
            series[k].push((ts, y));
        }
    }
    let [required, guaranteed, allowed, avg] = series;
    let panels = [
        Panel {
            title: format!("Deadlines, {}", sc.name),
            x_label: "time (s)".into(),
            y_label: "deadline (ms)".into(),
            series: vec![
                Series { name: "required".into(), points: required, step: false },
                Series { name: "guaranteed".into(), points: guaranteed, step: true },
                Series { name: "transition bound".into(), points: allowed, step: true },
            ],
        },
        Panel {
            title: "Average power per 100 ms".into(),
            x_label: "time (s)".into(),
            y_label: "power".into(),
            series: vec![Series { name: "power".into(), points: avg, step: true }],
        },
    ];
    Ok((csv, svg::line_panels(&panels, 900.0, 260.0)))
}

struct Row {
    scenario: String,
    label: String,
    method: Method,
    quantized: bool,
    report: Report,
}

pub fn compare(ctx: &Context, explicit: &[PathBuf], only: Option<Method>, precision: Precision) -> Result<bool> {
    let graph = ctx.graph()?;
    let map = ctx.deadline_map(&graph)?;
    let tables = ctx.tables(&graph, &map)?;
    let methods: Vec<Method> = match only {
        Some(m) => vec![m],
        None => ctx.config.methods.clone(),
    };
    let mut variants = Vec::new();
    for &method in &methods {
        for quantized in precision.selected(&[false, true]) {
            variants.push((method, quantized, ctx.table(&tables, method, quantized)?));
        }
    }
    let scs = scenarios(ctx, explicit)?;
    let opts = {
        let mut o = ctx.config.sim_options();
        o.record_segments = false;
        o
    };

    // Each scenario is independent; simulate them on separate threads.
    let results: Vec<Result<Vec<Row>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scs
            .iter()
            .map(|sc| {
                let (graph, map, tables, variants, opts) = (&graph, &map, &tables, &variants, &opts);
                let power = &ctx.config.power;
                scope.spawn(move || -> Result<Vec<Row>> {
                    let baseline = simulate(graph, &tables.baseline, map, sc, opts)?;
                    variants
                        .iter()
                        .map(|(method, quantized, table)| {
                            let trace = simulate(graph, table, map, sc, opts)?;
                            Ok(Row {
                                scenario: sc.name.clone(),
                                label: table_name(*method, *quantized),
                                method: *method,
                                quantized: *quantized,
                                report: summarize(&trace, power, &baseline)?,
                            })
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().map_err(|_| anyhow!("simulation thread panicked"))?).collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }

    let mut csv = String::from(
        "scenario,method,quantized,energy,average_power,reduction_pct,violations,transient,requirement_misses,deadline_misses,mode_changes\n",
    );
    for r in &rows {
        let p = &r.report;
        let _ = writeln!(
            csv,
            "{},{},{},{:.3},{:.3},{:.3},{},{},{},{},{}",
            r.scenario,
            r.method,
            r.quantized,
            p.total_energy,
            p.average_power,
            p.reduction_percent,
            p.violations,
            p.transient_exceedances,
            p.requirement_misses,
            p.deadline_misses,
            p.mode_changes
        );
    }
    ctx.write("compare.csv", &csv)?;
    let mut residency = String::from("scenario,method,mode,residency_s\n");
    for r in &rows {
        for &(mode, ns) in &r.report.mode_residency_ns {
            let _ = writeln!(residency, "{},{},{},{:.3}", r.scenario, r.label, mode + 1, ns_to_s(ns));
        }
    }
    ctx.write("residency.csv", residency)?;
    let categories: Vec<String> = scs.iter().map(|s| s.name.clone()).collect();
    let series: Vec<(String, Vec<f64>)> = variants
        .iter()
        .map(|(m, q, _)| {
            let label = table_name(*m, *q);
            let values = categories
                .iter()
                .map(|c| rows.iter().find(|r| &r.scenario == c && r.label == label).map_or(0.0, |r| r.report.total_energy))
                .collect();
            (label, values)
        })
        .collect();
    ctx.write("energy.svg", svg::grouped_bars("Energy per scenario", "energy (power unit x s)", &categories, &series))?;
    ctx.write_metadata()?;
    for r in &rows {
        println!("{}", status_line(&format!("{} [{}]", r.scenario, r.label), &r.report));
    }
    Ok(rows.iter().all(|r| r.report.is_clean()))
}
