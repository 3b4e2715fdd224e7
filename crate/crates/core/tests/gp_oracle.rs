// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use dyndl_core::gp::{gradient_check, solve_gp, SolverOptions, Status};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_matches_log_grid_search(seed in any::<u64>()) {
        let problem = common::random_gp(&mut ChaCha8Rng::seed_from_u64(seed));
        let (grid, _) = common::grid_minimum(&problem).expect("feasible by construction");
        let sol = solve_gp(&problem, &SolverOptions::default()).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal);
        prop_assert!(common::worst_violation(&problem, &sol.values) <= 1e-8);
        // The grid only visits feasible points, so it can never beat the optimum.
        prop_assert!(sol.objective_value <= grid * (1.0 + 1e-6), "solver {} grid {}", sol.objective_value, grid);
        prop_assert!((sol.objective_value - grid).abs() <= 0.01 * grid, "solver {} grid {}", sol.objective_value, grid);
    }

    #[test]
    fn analytic_gradients_match_differences(seed in any::<u64>(), t in 0.1f64..0.9) {
        let problem = common::random_gp(&mut ChaCha8Rng::seed_from_u64(seed));
        let x: Vec<f64> = problem.lower.iter().zip(&problem.upper)
            .map(|(l, h)| (l.ln() * (1.0 - t) + h.ln() * t).exp())
            .collect();
        prop_assert!(gradient_check(&problem, &x).unwrap() < 1e-5);
    }

    #[test]
    fn argmin_is_scale_invariant(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let problem = common::random_gp(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut scaled = problem.clone();
        scaled.objective = problem.objective.scaled(scale);
        let a = solve_gp(&problem, &SolverOptions::default()).unwrap();
        let b = solve_gp(&scaled, &SolverOptions::default()).unwrap();
        prop_assert!((b.objective_value / scale - a.objective_value).abs() <= 1e-5 * a.objective_value);
        // The minimizer may be non-unique; compare objective at each other's points instead.
        let fa = problem.objective.eval(&b.values);
        prop_assert!((fa - a.objective_value).abs() <= 1e-5 * a.objective_value, "{} vs {}", fa, a.objective_value);
    }
}
