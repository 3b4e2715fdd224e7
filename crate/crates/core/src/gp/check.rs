// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use super::solver::Lse;
use super::{GpError, GpProblem};

const STEP: f64 = 1e-6;

/// Largest relative difference between the analytic log-space gradients of
/// the objective and every constraint and their central finite differences
/// at `x`. Each error is `|a - f| / max(|a|, |f|, 1)`.
pub fn gradient_check(problem: &GpProblem, x: &[f64]) -> Result<f64, GpError> {
    problem.validate()?;
    if x.len() != problem.num_vars {
        return Err(GpError::Malformed(format!(
            "point has {} coordinates for {} variables",
            x.len(),
            problem.num_vars
        )));
    }
    for (i, &xi) in x.iter().enumerate() {
        if !(xi > problem.lower[i] && xi < problem.upper[i]) {
            return Err(GpError::PointOutOfDomain { index: i });
        }
    }
    let n = problem.num_vars;
    let y: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let mut worst = 0.0f64;
    let mut w = Vec::new();
    let mut grad = vec![0.0; n];
    let posys = std::iter::once(&problem.objective).chain(problem.constraints.iter());
    for p in posys {
        let lse = Lse::from_posynomial(p, n);
        grad.iter_mut().for_each(|g| *g = 0.0);
        lse.eval(&y, &mut w, &mut grad);
        // Finite differences evaluate the posynomial directly in x-space.
        let f = |yy: &[f64]| {
            let xx: Vec<f64> = yy.iter().map(|v| v.exp()).collect();
            p.eval(&xx).ln()
        };
        let mut probe = y.clone();
        for i in 0..n {
            probe[i] = y[i] + STEP;
            let up = f(&probe);
            probe[i] = y[i] - STEP;
            let down = f(&probe);
            probe[i] = y[i];
            let fd = (up - down) / (2.0 * STEP);
            let err = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1.0);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Monomial, Posynomial};

    #[test]
    fn single_monomial_is_exact() {
        let obj: Posynomial = Monomial::new(2.0, [(0, 1.0)]).into();
        let p = GpProblem::new(obj, vec![0.1], vec![10.0]);
        assert!(gradient_check(&p, &[1.0]).unwrap() < 1e-6);
    }

    #[test]
    fn square_at_three() {
        let obj: Posynomial = Monomial::new(1.0, [(0, 2.0)]).into();
        let p = GpProblem::new(obj, vec![0.1], vec![10.0]);
        assert!(gradient_check(&p, &[3.0]).unwrap() < 1e-6);
    }

    #[test]
    fn x_plus_inverse_at_two() {
        let obj = Posynomial::new(vec![Monomial::new(1.0, [(0, 1.0)]), Monomial::new(1.0, [(0, -1.0)])]);
        let p = GpProblem::new(obj, vec![0.1], vec![10.0]);
        assert!(gradient_check(&p, &[2.0]).unwrap() < 1e-6);
    }

    #[test]
    fn mixed_problem_agrees() {
        let obj = Posynomial::new(vec![
            Monomial::new(1.0, [(0, 1.0), (1, 1.0)]),
            Monomial::new(1.0, [(0, -1.0)]),
        ]);
        let mut p = GpProblem::new(obj, vec![0.1, 0.1], vec![10.0, 10.0]);
        p.constrain(Posynomial::new(vec![
            Monomial::new(0.5, [(0, 2.0)]),
            Monomial::new(0.25, [(1, -1.5)]),
        ]));
        assert!(gradient_check(&p, &[1.0, 2.0]).unwrap() < 1e-6);
    }

    #[test]
    fn boundary_point_rejected() {
        let obj: Posynomial = Monomial::new(1.0, [(0, 1.0)]).into();
        let p = GpProblem::new(obj, vec![0.1], vec![10.0]);
        assert_eq!(gradient_check(&p, &[0.1]), Err(GpError::PointOutOfDomain { index: 0 }));
    }
}
