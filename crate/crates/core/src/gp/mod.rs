// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Geometric programming.
//!
//! A geometric program minimizes a posynomial subject to posynomial
//! constraints `f_j(x) <= 1` and positive box bounds. Under `y = ln x`
//! every posynomial becomes a log-sum-exp of affine functions, so the
//! problem is convex and the barrier method in [`solver`] finds the global
//! optimum.

mod check;
mod solver;

use serde::Serialize;
use thiserror::Error;

pub use check::gradient_check;
pub use solver::solve_gp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("malformed geometric program: {0}")]
    Malformed(String),
    #[error("problem is infeasible (phase-1 optimum {phase1_value:e} in log space)")]
    Infeasible { phase1_value: f64 },
    #[error("solver did not converge within {iterations} outer iterations")]
    MaxIterations { iterations: usize },
    #[error("point is outside the open variable box at variable {index}")]
    PointOutOfDomain { index: usize },
}

/// `c · Π x_i^a_i` with `c > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monomial {
    coefficient: f64,
    exponents: Vec<(usize, f64)>,
}

impl Monomial {
    /// Repeated variables are merged and zero exponents dropped.
    pub fn new(coefficient: f64, exponents: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        let mut all: Vec<(usize, f64)> = exponents.into_iter().collect();
        all.sort_by_key(|&(v, _)| v);
        for (v, a) in all {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Monomial { coefficient, exponents: merged }
    }

    pub fn constant(coefficient: f64) -> Self {
        Monomial { coefficient, exponents: Vec::new() }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn exponents(&self) -> &[(usize, f64)] {
        &self.exponents
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .fold(self.coefficient, |acc, &(v, a)| acc * x[v].powf(a))
    }
}

/// A sum of monomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posynomial {
    terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Posynomial { terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|m| m.eval(x)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Posynomial {
            terms: self
                .terms
                .iter()
                .map(|m| Monomial { coefficient: m.coefficient * factor, exponents: m.exponents.clone() })
                .collect(),
        }
    }
}

impl From<Monomial> for Posynomial {
    fn from(m: Monomial) -> Self {
        Posynomial { terms: vec![m] }
    }
}

impl FromIterator<Monomial> for Posynomial {
    fn from_iter<I: IntoIterator<Item = Monomial>>(iter: I) -> Self {
        Posynomial { terms: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpProblem {
    pub num_vars: usize,
    pub objective: Posynomial,
    /// Each constraint reads `posynomial <= 1`.
    pub constraints: Vec<Posynomial>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GpProblem {
    pub fn new(objective: Posynomial, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        GpProblem { num_vars: lower.len(), objective, constraints: Vec::new(), lower, upper }
    }

    pub fn constrain(&mut self, constraint: impl Into<Posynomial>) {
        self.constraints.push(constraint.into());
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |msg: String| Err(GpError::Malformed(msg));
        if self.lower.len() != self.num_vars || self.upper.len() != self.num_vars {
            return bad(format!("bounds have {} / {} entries for {} variables",
                self.lower.len(), self.upper.len(), self.num_vars));
        }
        for i in 0..self.num_vars {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("variable {i} has invalid bounds [{lo}, {hi}]"));
            }
        }
        let posys = std::iter::once(&self.objective).chain(self.constraints.iter());
        for (k, p) in posys.enumerate() {
            if p.terms.is_empty() {
                return bad(format!("posynomial {k} has no terms"));
            }
            for m in &p.terms {
                if !(m.coefficient > 0.0 && m.coefficient.is_finite()) {
                    return bad(format!("posynomial {k} has coefficient {}", m.coefficient));
                }
                for &(v, a) in &m.exponents {
                    if v >= self.num_vars || !a.is_finite() {
                        return bad(format!("posynomial {k} has exponent {a} on variable {v}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The log-transformed problem, for debug dumps.
    pub fn convex_form(&self) -> ConvexForm {
        let lse = |p: &Posynomial| LseDump {
            terms: p
                .terms
                .iter()
                .map(|m| (m.coefficient.ln(), m.exponents.clone()))
                .collect(),
        };
        ConvexForm {
            num_vars: self.num_vars,
            objective: lse(&self.objective),
            constraints: self.constraints.iter().map(lse).collect(),
            log_lower: self.lower.iter().map(|v| v.ln()).collect(),
            log_upper: self.upper.iter().map(|v| v.ln()).collect(),
        }
    }
}

/// `log Σ exp(b_k + a_k·y)`, listed as `(b_k, a_k)` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct LseDump {
    pub terms: Vec<(f64, Vec<(usize, f64)>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexForm {
    pub num_vars: usize,
    pub objective: LseDump,
    pub constraints: Vec<LseDump>,
    pub log_lower: Vec<f64>,
    pub log_upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Certified relative suboptimality of the objective.
    pub rel_tolerance: f64,
    /// Allowed constraint violation `f_j(x) - 1`.
    pub feas_tolerance: f64,
    /// Outer (barrier-weight) iterations, both phases combined.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rel_tolerance: 1e-6, feas_tolerance: 1e-8, max_iterations: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub phase: u8,
    pub outer: usize,
    pub barrier_weight: f64,
    pub log_objective: f64,
    pub gap: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: Status,
    pub outer_iterations: usize,
    pub newton_steps: usize,
    pub log: Vec<IterationRecord>,
}

impl GpSolution {
    /// Turns a non-optimal status into the matching error.
    pub fn certified(self) -> Result<Self, GpError> {
        match self.status {
            Status::Optimal => Ok(self),
            Status::Infeasible => Err(GpError::Infeasible {
                phase1_value: self.log.last().map_or(f64::NAN, |r| r.log_objective),
            }),
            Status::MaxIterations => Err(GpError::MaxIterations { iterations: self.outer_iterations }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_merges_exponents() {
        let m = Monomial::new(2.0, [(1, 1.0), (0, 2.0), (1, -1.0)]);
        assert_eq!(m.exponents(), &[(0, 2.0)]);
        assert_eq!(m.eval(&[3.0, 5.0]), 18.0);
    }

    #[test]
    fn validation_catches_bad_input() {
        let obj: Posynomial = Monomial::new(1.0, [(0, 1.0)]).into();
        let ok = GpProblem::new(obj.clone(), vec![1.0], vec![2.0]);
        assert!(ok.validate().is_ok());
        let bad_bounds = GpProblem::new(obj.clone(), vec![0.0], vec![2.0]);
        assert!(bad_bounds.validate().is_err());
        let mut bad_var = GpProblem::new(obj, vec![1.0], vec![2.0]);
        bad_var.constrain(Monomial::new(1.0, [(3, 1.0)]));
        assert!(bad_var.validate().is_err());
        let neg = GpProblem::new(Monomial::new(-1.0, []).into(), vec![1.0], vec![2.0]);
        assert!(neg.validate().is_err());
    }
}
