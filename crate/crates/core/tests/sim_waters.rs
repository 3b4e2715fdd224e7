// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use dyndl_core::optimizer::{quantize_speeds, Method, ModeTable};
use dyndl_core::scenario::SynthKind;
use dyndl_core::sim::{simulate, summarize, SimError, SimOptions};
use dyndl_core::{DeadlineMap, PowerParams, Scenario, SystemConfig, TaskGraph, TaskSpec};

const MINUTE: u64 = 60_000_000_000;

fn constant(v: f64, horizon: u64) -> Scenario {
    Scenario::synthesize(&SynthKind::Constant { v }, horizon).unwrap()
}

fn opts(params: PowerParams) -> SimOptions {
    let mut o = SimOptions::new(params);
    o.record_segments = false;
    o
}

/// Velocity at the middle of mode `j`'s deadline range.
fn velocity_in_mode(map: &DeadlineMap, j: usize) -> f64 {
    let span = (map.d_max_ns - map.d_min_ns) as f64 / map.mode_count() as f64;
    let d = map.mode_deadlines[j] as f64 + span / 2.0;
    common::velocity_for_deadline(d / 1e9, map.lambda_m, map.a_max_mps2).max(0.0)
}

#[test]
fn constant_velocity_stays_in_one_mode_within_its_deadline() {
    let w = common::waters();
    for j in [0, 7, 23] {
        let v = velocity_in_mode(&w.map, j);
        assert_eq!(w.map.mode_for_velocity(v).unwrap(), j);
        let trace = simulate(&w.graph, &w.tables.multimode, &w.map, &constant(v, MINUTE / 4), &opts(w.params)).unwrap();
        assert!(trace.events.is_empty(), "mode {j}: {:?}", trace.events.first());
        assert!(!trace.reactions.is_empty());
        let d = w.map.mode_deadlines[j];
        assert!(trace.reactions.iter().all(|r| r.delay_ns() <= d), "mode {j}");
        assert!(trace.deadline_misses.is_empty());
        assert_eq!(trace.mode_residency_ns[j], trace.horizon_ns);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let w = common::waters();
    let sc = Scenario::synthesize(&SynthKind::RandomDrive { seed: 11, v_max: 31.6, a_max: 3.0 }, MINUTE / 2).unwrap();
    let mut o = opts(w.params);
    o.record_segments = true;
    let a = simulate(&w.graph, &w.tables.multimode, &w.map, &sc, &o).unwrap();
    let b = simulate(&w.graph, &w.tables.multimode, &w.map, &sc, &o).unwrap();
    assert!(!a.events.is_empty());
    assert_eq!(a, b);
}

#[test]
fn steady_power_matches_closed_form_in_every_method() {
    let w = common::waters();
    let wcet: Vec<u64> = w.graph.tasks().iter().map(|t| t.wcet_ns).collect();
    let p = w.params;
    for method in Method::ALL {
        for j in [0, 11, 23] {
            let table = w.tables.get(method);
            let v = velocity_in_mode(&w.map, j);
            let trace = simulate(&w.graph, table, &w.map, &constant(v, MINUTE), &opts(p)).unwrap();
            let expected = common::steady_power(&wcet, &table.periods_ns[j], &table.speeds[j], p.alpha, p.beta, p.gamma, p.s_min);
            let got = trace.average_power();
            assert!((got - expected).abs() <= 0.01 * expected, "{method} mode {j}: {got} vs {expected}");
        }
    }
}

#[test]
fn report_against_itself_saves_nothing() {
    let w = common::waters();
    let trace = simulate(&w.graph, &w.tables.static_, &w.map, &constant(10.0, MINUTE / 10), &opts(w.params)).unwrap();
    let r = summarize(&trace, &w.params, &trace).unwrap();
    assert_eq!(r.energy_ratio, 1.0);
    assert_eq!(r.reduction_percent, 0.0);
    assert!(r.is_clean());
}

#[test]
fn busy_energy_scales_with_speed_power() {
    // One light task: at full speed and at s_min the job pattern is the
    // same, so busy dynamic energy differs by s_min^(γ-1).
    let graph = TaskGraph::new(vec![TaskSpec { name: "t".into(), wcet_ns: 1_000_000 }], vec![]).unwrap();
    let params = PowerParams::reference();
    let map = DeadlineMap::with_modes(20.0, 2.5, 4_000_000_000, vec![20_000_000]).unwrap();
    let table = |s: f64| {
        ModeTable::uniform(vec![20_000_000], &SystemConfig { periods_ns: vec![10_000_000], speeds: vec![s] }, &graph)
    };
    let sc = constant(0.0, MINUTE / 10);
    let fast = simulate(&graph, &table(1.0), &map, &sc, &opts(params)).unwrap();
    let slow = simulate(&graph, &table(params.s_min), &map, &sc, &opts(params)).unwrap();
    let r = summarize(&slow, &params, &fast).unwrap();
    let expected = params.s_min.powf(params.gamma - 1.0);
    assert!((r.busy_dynamic_ratio - expected).abs() <= 1e-6 * expected, "{} vs {expected}", r.busy_dynamic_ratio);
}

#[test]
fn traces_of_different_length_cannot_be_compared() {
    let w = common::waters();
    let a = simulate(&w.graph, &w.tables.static_, &w.map, &constant(5.0, 1_000_000_000), &opts(w.params)).unwrap();
    let b = simulate(&w.graph, &w.tables.static_, &w.map, &constant(5.0, 2_000_000_000), &opts(w.params)).unwrap();
    assert_eq!(
        summarize(&a, &w.params, &b),
        Err(SimError::HorizonMismatch { a: 1_000_000_000, b: 2_000_000_000 })
    );
}

#[test]
fn top_speed_pins_multimode_to_static() {
    let w = common::waters();
    let sc = constant(common::V_DESIGN_MPS, MINUTE / 4);
    let o = opts(w.params);
    let multi = simulate(&w.graph, &w.tables.multimode, &w.map, &sc, &o).unwrap();
    let stat = simulate(&w.graph, &w.tables.static_, &w.map, &sc, &o).unwrap();
    assert_eq!(multi.mode_residency_ns[0], multi.horizon_ns);
    let (a, b) = (multi.energy.total(), stat.energy.total());
    assert!((a - b).abs() <= 1e-3 * b, "{a} vs {b}");
}

#[test]
fn energy_ordering_on_random_drives() {
    let w = common::waters();
    let o = opts(w.params);
    for seed in 100..104 {
        let sc = Scenario::synthesize(&SynthKind::RandomDrive { seed, v_max: 31.6, a_max: 3.0 }, MINUTE / 2).unwrap();
        let mut energy = std::collections::BTreeMap::new();
        for method in Method::ALL {
            let cont = w.tables.get(method).clone();
            let quant = quantize_speeds(&cont, &w.ladder).unwrap();
            for (q, table) in [(false, cont), (true, quant)] {
                let t = simulate(&w.graph, &table, &w.map, &sc, &o).unwrap();
                assert!(t.deadline_misses.is_empty() && t.violation_count() == 0, "seed {seed} {method} {q}");
                energy.insert((method, q), t.energy.total());
            }
        }
        for q in [false, true] {
            assert!(energy[&(Method::Multimode, q)] <= energy[&(Method::Static, q)]);
            assert!(energy[&(Method::Static, q)] <= energy[&(Method::Baseline, q)]);
        }
        for method in Method::ALL {
            assert!(energy[&(method, true)] >= energy[&(method, false)] * (1.0 - 1e-9), "seed {seed} {method}");
        }
    }
}
