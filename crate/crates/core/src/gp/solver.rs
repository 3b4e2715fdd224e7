// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Log-barrier interior-point method for geometric programs in log space.
//!
//! Phase 1 pushes the box midpoint to a strictly feasible point by
//! minimizing an auxiliary slack `σ` with `F_j(y) <= σ`. Phase 2 follows the
//! central path of `t·F_0(y) - Σ ln(-F_j(y)) - Σ ln(box slack)`, multiplying
//! `t` by ten per outer iteration, until the duality gap `m/t` certifies the
//! requested relative accuracy.

use nalgebra::{DMatrix, DVector};

use super::{GpError, GpProblem, GpSolution, IterationRecord, Posynomial, SolverOptions, Status};

const BARRIER_GROWTH: f64 = 10.0;
const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;
const LS_ALPHA: f64 = 0.01;
const LS_BETA: f64 = 0.5;
/// Slack below which a phase-1 point is accepted as a phase-2 start.
const PHASE1_MARGIN: f64 = 1e-3;

struct Term {
    log_coeff: f64,
    exps: Vec<(usize, f64)>,
}

/// `ln Σ_k exp(b_k + a_k·y)`.
pub(super) struct Lse {
    terms: Vec<Term>,
    support: Vec<usize>,
}

impl Lse {
    /// `free[v]` maps a problem variable to its solver index, or `None` when
    /// the variable is pinned to `pinned_log[v]`.
    fn compile(p: &Posynomial, free: &[Option<usize>], pinned_log: &[f64]) -> Lse {
        let mut support = Vec::new();
        let terms = p
            .terms()
            .iter()
            .map(|m| {
                let mut log_coeff = m.coefficient().ln();
                let mut exps = Vec::with_capacity(m.exponents().len());
                for &(v, a) in m.exponents() {
                    match free[v] {
                        Some(k) => {
                            exps.push((k, a));
                            support.push(k);
                        }
                        None => log_coeff += a * pinned_log[v],
                    }
                }
                Term { log_coeff, exps }
            })
            .collect();
        support.sort_unstable();
        support.dedup();
        Lse { terms, support }
    }

    pub(super) fn from_posynomial(p: &Posynomial, num_vars: usize) -> Lse {
        let free: Vec<Option<usize>> = (0..num_vars).map(Some).collect();
        Lse::compile(p, &free, &vec![0.0; num_vars])
    }

    fn exponent(term: &Term, y: &[f64]) -> f64 {
        term.exps.iter().fold(term.log_coeff, |acc, &(k, a)| acc + a * y[k])
    }

    pub(super) fn value(&self, y: &[f64]) -> f64 {
        let max = self
            .terms
            .iter()
            .map(|t| Self::exponent(t, y))
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.terms.iter().map(|t| (Self::exponent(t, y) - max).exp()).sum();
        max + sum.ln()
    }

    /// Value, softmax weights in `w` and gradient on the support in `g`.
    pub(super) fn eval(&self, y: &[f64], w: &mut Vec<f64>, g: &mut [f64]) -> f64 {
        w.clear();
        w.extend(self.terms.iter().map(|t| Self::exponent(t, y)));
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for z in w.iter_mut() {
            *z = (*z - max).exp();
            sum += *z;
        }
        for z in w.iter_mut() {
            *z /= sum;
        }
        for &k in &self.support {
            g[k] = 0.0;
        }
        for (t, &wk) in self.terms.iter().zip(w.iter()) {
            for &(k, a) in &t.exps {
                g[k] += wk * a;
            }
        }
        max + sum.ln()
    }

    /// `H += c_terms · Σ w_k a_k a_kᵀ + c_outer · g gᵀ`.
    fn add_curvature(&self, w: &[f64], g: &[f64], c_terms: f64, c_outer: f64, h: &mut DMatrix<f64>) {
        for (t, &wk) in self.terms.iter().zip(w) {
            let s = c_terms * wk;
            for &(i, ai) in &t.exps {
                for &(j, aj) in &t.exps {
                    h[(i, j)] += s * ai * aj;
                }
            }
        }
        for &i in &self.support {
            let gi = c_outer * g[i];
            if gi == 0.0 {
                continue;
            }
            for &j in &self.support {
                h[(i, j)] += gi * g[j];
            }
        }
    }
}

struct LogProblem {
    n: usize,
    objective: Lse,
    constraints: Vec<Lse>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

struct Scratch {
    w: Vec<f64>,
    g: Vec<f64>,
}

impl LogProblem {
    fn barrier_count(&self) -> f64 {
        (self.constraints.len() + 2 * self.n) as f64
    }

    fn phi(&self, y: &[f64], t: f64) -> Option<f64> {
        let mut acc = 0.0;
        for i in 0..self.n {
            let (a, b) = (y[i] - self.lo[i], self.hi[i] - y[i]);
            if !(a > 0.0 && b > 0.0) {
                return None;
            }
            acc -= a.ln() + b.ln();
        }
        for c in &self.constraints {
            let f = c.value(y);
            if !(f < 0.0) {
                return None;
            }
            acc -= (-f).ln();
        }
        Some(acc + t * self.objective.value(y))
    }

    fn grad_hess(&self, y: &[f64], t: f64, s: &mut Scratch) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);

        self.objective.eval(y, &mut s.w, &mut s.g);
        for &k in &self.objective.support {
            grad[k] += t * s.g[k];
        }
        self.objective.add_curvature(&s.w, &s.g, t, -t, &mut hess);

        for c in &self.constraints {
            let f = c.eval(y, &mut s.w, &mut s.g);
            let inv = 1.0 / -f;
            for &k in &c.support {
                grad[k] += inv * s.g[k];
            }
            // ∇²F/(-F) + ∇F∇Fᵀ/F², with ∇²F = Σ w a aᵀ - g gᵀ.
            c.add_curvature(&s.w, &s.g, inv, inv * inv - inv, &mut hess);
        }

        for i in 0..n {
            let a = 1.0 / (y[i] - self.lo[i]);
            let b = 1.0 / (self.hi[i] - y[i]);
            grad[i] += b - a;
            hess[(i, i)] += a * a + b * b;
        }
        (grad, hess)
    }

    fn strictly_feasible(&self, y: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.value(y) < 0.0)
    }

    /// Newton's method on the barrier function for a fixed weight `t`.
    /// Returns the number of steps and whether the decrement converged.
    fn center(&self, y: &mut [f64], t: f64, s: &mut Scratch) -> (usize, bool) {
        for step in 0..MAX_NEWTON {
            let (grad, hess) = self.grad_hess(y, t, s);
            let dx = solve_spd(hess, -&grad);
            let slope = grad.dot(&dx);
            if -slope / 2.0 <= NEWTON_TOL {
                return (step, true);
            }
            let f0 = self.phi(y, t).expect("iterate stays in the domain");
            let slack = 4.0 * f64::EPSILON * f0.abs();
            let mut step_len = 1.0;
            let mut cand = vec![0.0; self.n];
            loop {
                for i in 0..self.n {
                    cand[i] = y[i] + step_len * dx[i];
                }
                if let Some(f) = self.phi(&cand, t) {
                    if f <= f0 + LS_ALPHA * step_len * slope + slack {
                        if f0 - f <= slack {
                            // Decrease below round-off: as centered as representable.
                            y.copy_from_slice(&cand);
                            return (step + 1, true);
                        }
                        break;
                    }
                }
                step_len *= LS_BETA;
                if step_len < 1e-16 {
                    // Round-off floor: no further progress is representable.
                    return (step + 1, true);
                }
            }
            y.copy_from_slice(&cand);
        }
        (MAX_NEWTON, false)
    }
}

fn solve_spd(hess: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    if let Some(ch) = hess.clone().cholesky() {
        return ch.solve(&rhs);
    }
    let scale = hess.diagonal().iter().fold(1.0f64, |m, &d| m.max(d.abs()));
    let mut delta = 1e-12 * scale;
    loop {
        let mut reg = hess.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += delta;
        }
        if let Some(ch) = reg.cholesky() {
            return ch.solve(&rhs);
        }
        delta *= 100.0;
    }
}

enum Phase1 {
    Feasible(Vec<f64>),
    Infeasible,
    OutOfIterations,
}

struct Run<'a> {
    opts: &'a SolverOptions,
    outer: usize,
    newton: usize,
    log: Vec<IterationRecord>,
}

impl Run<'_> {
    fn phase1(&mut self, lp: &LogProblem, y0: &[f64]) -> Phase1 {
        let n = lp.n;
        let worst = lp.constraints.iter().map(|c| c.value(y0)).fold(f64::NEG_INFINITY, f64::max);
        let sigma0 = worst + 1.0;
        let sigma_var = n;
        let shift = |c: &Lse| Lse {
            terms: c
                .terms
                .iter()
                .map(|t| {
                    let mut exps = t.exps.clone();
                    exps.push((sigma_var, -1.0));
                    Term { log_coeff: t.log_coeff, exps }
                })
                .collect(),
            support: c.support.iter().copied().chain(std::iter::once(sigma_var)).collect(),
        };
        let aux = LogProblem {
            n: n + 1,
            objective: Lse {
                terms: vec![Term { log_coeff: 0.0, exps: vec![(sigma_var, 1.0)] }],
                support: vec![sigma_var],
            },
            constraints: lp.constraints.iter().map(shift).collect(),
            lo: lp.lo.iter().copied().chain(std::iter::once(-1.0)).collect(),
            hi: lp.hi.iter().copied().chain(std::iter::once(sigma0 + 1.0)).collect(),
        };
        let mut y: Vec<f64> = y0.iter().copied().chain(std::iter::once(sigma0)).collect();
        let mut scratch = Scratch { w: Vec::new(), g: vec![0.0; n + 1] };
        let mut t = 1.0;
        loop {
            if self.outer >= self.opts.max_iterations {
                return Phase1::OutOfIterations;
            }
            let (steps, ok) = aux.center(&mut y, t, &mut scratch);
            self.outer += 1;
            self.newton += steps;
            let sigma = y[sigma_var];
            let gap = aux.barrier_count() / t;
            self.log.push(IterationRecord {
                phase: 1,
                outer: self.outer,
                barrier_weight: t,
                log_objective: sigma,
                gap,
                newton_steps: steps,
            });
            if !ok {
                return Phase1::OutOfIterations;
            }
            let converged = gap < self.opts.feas_tolerance;
            if sigma < 0.0 && (sigma <= -PHASE1_MARGIN || converged) && lp.strictly_feasible(&y[..n]) {
                y.truncate(n);
                return Phase1::Feasible(y);
            }
            if sigma - gap > 0.0 || (converged && sigma >= 0.0) {
                return Phase1::Infeasible;
            }
            t *= BARRIER_GROWTH;
        }
    }

    fn phase2(&mut self, lp: &LogProblem, y: &mut [f64]) -> Status {
        let mut scratch = Scratch { w: Vec::new(), g: vec![0.0; lp.n] };
        let mut t = 1.0;
        loop {
            if self.outer >= self.opts.max_iterations {
                return Status::MaxIterations;
            }
            let (steps, ok) = lp.center(y, t, &mut scratch);
            self.outer += 1;
            self.newton += steps;
            let gap = lp.barrier_count() / t;
            self.log.push(IterationRecord {
                phase: 2,
                outer: self.outer,
                barrier_weight: t,
                log_objective: lp.objective.value(y),
                gap,
                newton_steps: steps,
            });
            if !ok {
                return Status::MaxIterations;
            }
            if gap < self.opts.rel_tolerance {
                return Status::Optimal;
            }
            t *= BARRIER_GROWTH;
        }
    }
}

/// Solves a geometric program to certified global optimality.
///
/// Only malformed input is an `Err`; infeasibility and non-convergence are
/// reported through [`GpSolution::status`] (see [`GpSolution::certified`]).
pub fn solve_gp(problem: &GpProblem, options: &SolverOptions) -> Result<GpSolution, GpError> {
    problem.validate()?;
    let nv = problem.num_vars;
    let log_lo: Vec<f64> = problem.lower.iter().map(|v| v.ln()).collect();
    let log_hi: Vec<f64> = problem.upper.iter().map(|v| v.ln()).collect();

    let mut free = vec![None; nv];
    let mut free_vars = Vec::new();
    for v in 0..nv {
        if problem.lower[v] < problem.upper[v] {
            free[v] = Some(free_vars.len());
            free_vars.push(v);
        }
    }
    let lp = LogProblem {
        n: free_vars.len(),
        objective: Lse::compile(&problem.objective, &free, &log_lo),
        constraints: problem.constraints.iter().map(|c| Lse::compile(c, &free, &log_lo)).collect(),
        lo: free_vars.iter().map(|&v| log_lo[v]).collect(),
        hi: free_vars.iter().map(|&v| log_hi[v]).collect(),
    };

    let mut run = Run { opts: options, outer: 0, newton: 0, log: Vec::new() };
    let mut y: Vec<f64> = (0..lp.n).map(|i| 0.5 * (lp.lo[i] + lp.hi[i])).collect();

    let status = if lp.n == 0 {
        let worst = lp.constraints.iter().map(|c| c.value(&y)).fold(f64::NEG_INFINITY, f64::max);
        if worst <= options.feas_tolerance.ln_1p() {
            Status::Optimal
        } else {
            Status::Infeasible
        }
    } else if lp.strictly_feasible(&y) {
        run.phase2(&lp, &mut y)
    } else {
        match run.phase1(&lp, &y) {
            Phase1::Feasible(start) => {
                y = start;
                run.phase2(&lp, &mut y)
            }
            Phase1::Infeasible => Status::Infeasible,
            Phase1::OutOfIterations => Status::MaxIterations,
        }
    };

    let mut values = problem.lower.clone();
    for (k, &v) in free_vars.iter().enumerate() {
        values[v] = y[k].exp();
    }
    Ok(GpSolution {
        objective_value: problem.objective.eval(&values),
        values,
        status,
        outer_iterations: run.outer,
        newton_steps: run.newton,
        log: run.log,
    })
}
