// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use dyndl_core::modechange::{aeap_worst_delay, alap_worst_delay};
use dyndl_core::Path;
use proptest::prelude::*;

fn shrinking_chain() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    prop::collection::vec((1u64..=6, 0u64..=12), 2..=4).prop_map(|pairs| {
        let new: Vec<u64> = pairs.iter().map(|&(n, _)| n).collect();
        let old: Vec<u64> = pairs.iter().map(|&(n, extra)| n + extra).collect();
        (old, new)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn aeap_bound_covers_every_phasing((old, new) in shrinking_chain()) {
        let path = Path((0..old.len()).collect());
        let bound = aeap_worst_delay(&old, &new, &path).unwrap();
        let seen = common::brute_force_chain_delay(&old, &new);
        prop_assert!(seen <= bound, "old {:?} new {:?}: simulated {} > bound {}", old, new, seen, bound);
    }

    #[test]
    fn alap_bound_dominates_both_steady_states((old, new) in shrinking_chain()) {
        let path = Path((0..old.len()).collect());
        let paths = [path];
        let bound = alap_worst_delay(&new, &old, &paths).unwrap();
        let steady = |p: &[u64]| p.iter().map(|v| 2 * v).sum::<u64>();
        prop_assert!(bound >= steady(&old).max(steady(&new)));
    }
}

#[test]
fn steady_chain_matches_two_periods_per_hop() {
    // No switch at all: the sweep must reach, but not exceed, 2p per hop.
    let p = [3u64, 5, 2];
    let seen = common::brute_force_chain_delay(&p, &p);
    assert!(seen <= 20);
    assert!(seen > 14, "{seen}");
}
