// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::OnceLock;

use dyndl_core::deadline::partition_modes;
use dyndl_core::gp::{gradient_check, SolverOptions};
use dyndl_core::optimizer::{
    derive_dmax, optimize_multi_mode, optimize_single_mode, quantize_speeds, single_mode_problem, MultiModeSolution,
};
use dyndl_core::power::{system_avg_power, utilization};
use dyndl_core::time::NS_PER_MS;
use dyndl_core::{FrequencyLadder, PowerParams, TaskGraph};

const D_MIN: u64 = 617 * NS_PER_MS;
const D_MAX: u64 = 2945 * NS_PER_MS;

fn solved() -> &'static MultiModeSolution {
    static CELL: OnceLock<MultiModeSolution> = OnceLock::new();
    CELL.get_or_init(|| {
        let modes = partition_modes(D_MIN, D_MAX, 24).unwrap();
        optimize_multi_mode(&TaskGraph::waters(), &PowerParams::reference(), &modes, &SolverOptions::default())
            .unwrap()
    })
}

#[test]
fn table_invariants_hold() {
    let g = TaskGraph::waters();
    let paths = g.enumerate_paths().unwrap();
    let t = &solved().table;
    assert_eq!(t.mode_count(), 24);
    t.check(&g, &paths, PowerParams::reference().s_min).unwrap();
}

#[test]
fn endpoints() {
    let g = TaskGraph::waters();
    let t = &solved().table;
    let first = t.normalized_dynamic_power(0, &g, 2.64);
    let last = t.normalized_dynamic_power(23, &g, 2.64);
    eprintln!("mode 1: {:.4}, mode 24: {:.5}", first, last);
    assert!((first - 0.589).abs() <= 0.03, "{first}");
    assert!((last - 0.010).abs() <= 0.01, "{last}");
}

#[test]
fn full_utilization_in_every_mode() {
    let g = TaskGraph::waters();
    let t = &solved().table;
    for j in 0..t.mode_count() {
        let u = utilization(&t.config(j), &g).unwrap();
        assert!((u - 1.0).abs() <= 1e-4, "mode {j}: {u}");
    }
}

#[test]
fn per_mode_power_nonincreasing() {
    let g = TaskGraph::waters();
    let t = &solved().table;
    let p: Vec<f64> = (0..24).map(|j| t.normalized_dynamic_power(j, &g, 2.64)).collect();
    assert!(p.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "{p:?}");
}

#[test]
fn multi_mode_close_to_independent_single_mode() {
    let g = TaskGraph::waters();
    let params = PowerParams::reference();
    let t = &solved().table;
    for j in [0usize, 7, 15, 23] {
        let single = optimize_single_mode(&g, &params, t.mode_deadlines_ns[j], &SolverOptions::default()).unwrap();
        let multi = t.normalized_dynamic_power(j, &g, params.gamma);
        let gap = (multi - single.objective) / single.objective;
        assert!(gap <= 0.10, "mode {j}: multi {multi} single {}", single.objective);
    }
}

#[test]
fn quantization_dominates() {
    let g = TaskGraph::waters();
    let params = PowerParams::reference();
    let t = &solved().table;
    let q = quantize_speeds(t, &FrequencyLadder::reference()).unwrap();
    let paths = g.enumerate_paths().unwrap();
    q.check(&g, &paths, params.s_min).unwrap();
    for j in 0..24 {
        let cont = system_avg_power(&t.config(j), &g, &params).unwrap();
        let disc = system_avg_power(&q.config(j), &g, &params).unwrap();
        assert!(disc >= cont * (1.0 - 1e-12), "mode {j}: {disc} < {cont}");
    }
}

#[test]
fn dmax_near_reported_value() {
    let d = derive_dmax(&TaskGraph::waters(), &PowerParams::reference(), &SolverOptions::default()).unwrap();
    eprintln!("d_max = {} ms", d / NS_PER_MS);
    assert!((d as i64 - D_MAX as i64).abs() <= 50 * NS_PER_MS as i64, "{d}");
}

#[test]
fn waters_gradient_check() {
    let g = TaskGraph::waters();
    let problem = single_mode_problem(&g, &PowerParams::reference(), &g.enumerate_paths().unwrap(), D_MIN);
    let n = g.len();
    let mut x: Vec<f64> = (0..n).map(|i| 1.5 * g.wcet_ns(i) as f64 / 1e6).collect();
    x.extend(std::iter::repeat(0.7).take(n));
    assert!(gradient_check(&problem, &x).unwrap() < 1e-5);
}
