// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Independent reference computations shared by the integration tests,
//! plus the WATERS fixture.
//!
//! The oracles never call into the library's numerical code: each is a
//! different formulation or an exhaustive search.

#![allow(dead_code)]

use dyndl_core::deadline::{deadline_from_velocity, DeadlineMap};
use dyndl_core::gp::{GpProblem, Monomial, Posynomial, SolverOptions};
use dyndl_core::optimizer::MethodTables;
use dyndl_core::{FrequencyLadder, PowerParams, TaskGraph};
use rand::Rng;

// ---------------------------------------------------------------- fixture

pub const LAMBDA_M: f64 = 20.0;
pub const A_MAX: f64 = 2.5;
pub const V_DESIGN_MPS: f64 = 114.0 / 3.6;
pub const D_MAX_NS: u64 = 2_945_000_000;
pub const MODES: usize = 24;

pub struct Waters {
    pub graph: TaskGraph,
    pub params: PowerParams,
    pub ladder: FrequencyLadder,
    pub map: DeadlineMap,
    pub tables: MethodTables,
}

/// The reference workload: 24 modes between the 114 km/h deadline and
/// 2945 ms, reference power model and ladder.
pub fn waters() -> Waters {
    let graph = TaskGraph::waters();
    let params = PowerParams::reference();
    let d_min = deadline_from_velocity(V_DESIGN_MPS, LAMBDA_M, A_MAX).unwrap();
    let map = DeadlineMap::new(LAMBDA_M, A_MAX, d_min, D_MAX_NS, MODES).unwrap();
    let tables = MethodTables::build(&graph, &params, &map.mode_deadlines, &SolverOptions::default()).unwrap();
    Waters { graph, params, ladder: FrequencyLadder::reference(), map, tables }
}

/// Velocity whose deadline is `d_s`, from `λ = v·d + a·d²/2`.
pub fn velocity_for_deadline(d_s: f64, lambda: f64, a_max: f64) -> f64 {
    (lambda - a_max * d_s * d_s / 2.0) / d_s
}

/// Deadline in seconds from the rationalized braking-distance formula
/// `2λ / (v + sqrt(v² + 2λa))`, which avoids the cancellation of the
/// textbook form.
pub fn deadline_s(v: f64, lambda: f64, a_max: f64) -> f64 {
    2.0 * lambda / (v + (v * v + 2.0 * lambda * a_max).sqrt())
}

/// Long-run average power of a periodic schedule: each task draws
/// `α s^γ` for `e/s` out of every `p`, the idle share draws `α s_min^γ`,
/// and `β` is always on.
pub fn steady_power(wcet_ns: &[u64], periods_ns: &[u64], speeds: &[f64], alpha: f64, beta: f64, gamma: f64, s_min: f64) -> f64 {
    let mut busy_share = 0.0;
    let mut dynamic = 0.0;
    for ((&e, &p), &s) in wcet_ns.iter().zip(periods_ns).zip(speeds) {
        let share = e as f64 / (p as f64 * s);
        busy_share += share;
        dynamic += alpha * s.powf(gamma) * share;
    }
    beta + dynamic + alpha * s_min.powf(gamma) * (1.0 - busy_share)
}

// ---------------------------------------------------------------- GP

pub const GP_LO: f64 = 0.2;
pub const GP_HI: f64 = 5.0;

fn random_monomial(rng: &mut impl Rng, n: usize) -> Monomial {
    let coefficient = rng.gen_range(-1.0f64..1.0).exp();
    let mut exps = Vec::new();
    for k in 0..n {
        if rng.gen_bool(0.7) {
            let a = (rng.gen_range(-2.0f64..2.0) * 4.0).round() / 4.0;
            if a != 0.0 {
                exps.push((k, a));
            }
        }
    }
    Monomial::new(coefficient, exps)
}

/// A random GP with at most three variables and three constraints, all in
/// the box `[GP_LO, GP_HI]`. Constraints are scaled to hold with slack at a
/// random interior anchor, so every instance is strictly feasible.
pub fn random_gp(rng: &mut impl Rng) -> GpProblem {
    let n = rng.gen_range(1..=3usize);
    let anchor: Vec<f64> = (0..n).map(|_| rng.gen_range(0.4f64.ln()..2.5f64.ln()).exp()).collect();
    let objective = Posynomial::new((0..rng.gen_range(1..=3)).map(|_| random_monomial(rng, n)).collect());
    let mut problem = GpProblem::new(objective, vec![GP_LO; n], vec![GP_HI; n]);
    for _ in 0..rng.gen_range(0..=3) {
        let raw = Posynomial::new((0..rng.gen_range(1..=3)).map(|_| random_monomial(rng, n)).collect());
        let target = rng.gen_range(0.3..0.9);
        let scale = target / raw.eval(&anchor);
        problem.constrain(raw.scaled(scale));
    }
    problem
}

/// `ln` of a posynomial at log-coordinates `y`.
fn log_eval(p: &Posynomial, y: &[f64]) -> f64 {
    p.terms()
        .iter()
        .map(|m| (m.coefficient().ln() + m.exponents().iter().map(|&(k, a)| a * y[k]).sum::<f64>()).exp())
        .sum::<f64>()
        .ln()
}

fn grid_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let count = ((hi - lo) / step).ceil() as usize;
    let mut axis: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    axis.push(hi);
    axis
}

fn grid_pass(problem: &GpProblem, lo: &[f64], hi: &[f64], step: f64) -> Option<(f64, Vec<f64>)> {
    let axes: Vec<Vec<f64>> = lo.iter().zip(hi).map(|(&l, &h)| grid_axis(l, h, step)).collect();
    let n = axes.len();
    let mut idx = vec![0usize; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut y = vec![0.0; n];
    loop {
        for k in 0..n {
            y[k] = axes[k][idx[k]];
        }
        if problem.constraints.iter().all(|c| log_eval(c, &y) <= 0.0) {
            let f = log_eval(&problem.objective, &y);
            if best.as_ref().is_none_or(|(b, _)| f < *b) {
                best = Some((f, y.clone()));
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Minimum of a GP by exhaustive search over feasible log-space grid points.
///
/// A full pass at step 0.05 picks an incumbent. Windows at steps 0.005 and
/// then 0.001 are searched around it and re-centred on every improvement:
/// a cube in all coordinates, then a ten times wider square in every pair of
/// coordinates, which lets the search climb thin ridges along an active
/// constraint. Returns the objective value and the point, or `None` if no
/// grid point is feasible.
pub fn grid_minimum(problem: &GpProblem) -> Option<(f64, Vec<f64>)> {
    let lo: Vec<f64> = problem.lower.iter().map(|v| v.ln()).collect();
    let hi: Vec<f64> = problem.upper.iter().map(|v| v.ln()).collect();
    let n = lo.len();
    let (mut f, mut y) = grid_pass(problem, &lo, &hi, 0.05)?;
    let mut windows: Vec<Vec<usize>> = vec![(0..n).collect()];
    for a in 0..n {
        for b in a + 1..n {
            windows.push(vec![a, b]);
        }
    }
    for (radius, step) in [(0.05, 0.005), (0.01, 0.001)] {
        for _ in 0..500 {
            let mut improved = false;
            for dims in &windows {
                let r = if dims.len() == n { radius } else { 10.0 * radius };
                let mut l = y.clone();
                let mut h = y.clone();
                for &k in dims {
                    l[k] = (y[k] - r).max(lo[k]);
                    h[k] = (y[k] + r).min(hi[k]);
                }
                if let Some((g, z)) = grid_pass(problem, &l, &h, step) {
                    if g < f {
                        f = g;
                        y = z;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    Some((f.exp(), y.iter().map(|v| v.exp()).collect()))
}

/// Largest `f_j(x) - 1` over constraints and the relative box excess.
pub fn worst_violation(problem: &GpProblem, x: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for c in &problem.constraints {
        worst = worst.max(c.eval(x) - 1.0);
    }
    for ((&v, &l), &h) in x.iter().zip(&problem.lower).zip(&problem.upper) {
        worst = worst.max((l - v) / l).max((v - h) / h);
    }
    worst
}

// ---------------------------------------------------------------- mode change

/// Worst sensor-to-output delay along a chain whose tasks switch from
/// `old` to `new` periods at their first release after a trigger at `0`,
/// found by sweeping every integer release phase.
///
/// Times are integer ticks. A sample arrives at `0⁺`; a job released at `r`
/// with period `p` sees data published strictly before `r` and publishes at
/// `r + p`. Task `i` releases at `φ_i + k·old_i` before its switch and at
/// `σ_i + k·new_i` from the switch on, where `σ_i` is its first release
/// after the trigger.
pub fn brute_force_chain_delay(old: &[u64], new: &[u64]) -> u64 {
    let n = old.len();
    let mut phase = vec![0u64; n];
    let mut worst = 0;
    loop {
        worst = worst.max(chain_delay(old, new, &phase));
        let mut k = 0;
        loop {
            if k == n {
                return worst;
            }
            phase[k] += 1;
            if phase[k] < old[k] {
                break;
            }
            phase[k] = 0;
            k += 1;
        }
    }
}

fn chain_delay(old: &[u64], new: &[u64], phase: &[u64]) -> u64 {
    // Data is available strictly after `ready`; the sample itself at 0⁺
    // behaves like data published at 0.
    let mut ready = 0u64;
    for i in 0..old.len() {
        let switch = if phase[i] > 0 { phase[i] } else { old[i] };
        // First release strictly after `ready`.
        let (release, period) = if ready < switch {
            // Old releases sit at `switch - k·old`, k >= 1; take the earliest above `ready`.
            let k = (switch - ready - 1) / old[i];
            if k >= 1 {
                (switch - k * old[i], old[i])
            } else {
                (switch, new[i])
            }
        } else {
            let k = (ready - switch) / new[i] + 1;
            (switch + k * new[i], new[i])
        };
        ready = release + period;
    }
    ready
}
