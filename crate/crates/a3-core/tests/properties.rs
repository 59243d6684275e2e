//! Property tests for the graph primitives, the injector, and the
//! detection round trip.

use a3_core::blueprint::{self, FatTreeParams, RoleAssignment};
use a3_core::fixation::{apply_fixation, verify_repaired};
use a3_core::injector::{inject, MalfunctionSpec};
use a3_core::{algo1, algo2, DeviceGraph};
use proptest::prelude::*;

/// Arbitrary simple graph on up to `max_n` nodes, one bool per unordered
/// pair.
fn graph_strategy(max_n: usize) -> impl Strategy<Value = DeviceGraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |mask| {
            let mut g = DeviceGraph::new(n);
            let mut idx = 0;
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if mask[idx] {
                        g.add_edge(u, v).unwrap();
                    }
                    idx += 1;
                }
            }
            g
        })
    })
}

/// Two independent graphs on the same node count.
fn graph_pair(max_n: usize) -> impl Strategy<Value = (DeviceGraph, DeviceGraph)> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(any::<bool>(), pairs),
            prop::collection::vec(any::<bool>(), pairs),
        )
            .prop_map(move |(ma, mb)| {
                let build = |mask: &[bool]| {
                    let mut g = DeviceGraph::new(n);
                    let mut idx = 0;
                    for u in 0..n as u32 {
                        for v in (u + 1)..n as u32 {
                            if mask[idx] {
                                g.add_edge(u, v).unwrap();
                            }
                            idx += 1;
                        }
                    }
                    g
                };
                (build(&ma), build(&mb))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// d + 2c = |E1| + |E2| under the identity alignment, every term in
    /// the ordered-pair convention.
    #[test]
    fn hamming_common_edge_identity((a, b) in graph_pair(12)) {
        let d = a.hamming_distance(&b).unwrap();
        let c = 2 * a.common_edges(&b).unwrap();
        let e = 2 * (a.edge_count() + b.edge_count());
        prop_assert_eq!(d + 2 * c, e);
    }

    #[test]
    fn similarity_is_symmetric_and_bounded((a, _) in graph_pair(12)) {
        for u in 0..a.n() as u32 {
            for v in 0..a.n() as u32 {
                let s = a.similarity(u, v).unwrap();
                prop_assert_eq!(s, a.similarity(v, u).unwrap());
                prop_assert!(s <= a.degree(u).unwrap().min(a.degree(v).unwrap()));
            }
        }
    }

    #[test]
    fn hamming_is_a_metric((a, b) in graph_pair(10), c in graph_strategy(10)) {
        prop_assert_eq!(a.hamming_distance(&a).unwrap(), 0);
        prop_assert_eq!(
            a.hamming_distance(&b).unwrap(),
            b.hamming_distance(&a).unwrap()
        );
        if c.n() == a.n() {
            let ab = a.hamming_distance(&b).unwrap();
            let bc = b.hamming_distance(&c).unwrap();
            let ac = a.hamming_distance(&c).unwrap();
            prop_assert!(ac <= ab + bc);
        }
        // distance zero means identical adjacency
        if a.hamming_distance(&b).unwrap() == 0 {
            prop_assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        }
    }

    #[test]
    fn text_format_round_trips(g in graph_strategy(12)) {
        let text = g.to_text();
        let back = DeviceGraph::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(g.hamming_distance(&back).unwrap(), 0);
    }

    #[test]
    fn fingerprints_agree_exactly_with_row_equality(g in graph_strategy(10)) {
        for u in 0..g.n() as u32 {
            for v in 0..g.n() as u32 {
                if g.neighbors(u) == g.neighbors(v) {
                    prop_assert_eq!(
                        g.row_fingerprint(u).unwrap(),
                        g.row_fingerprint(v).unwrap()
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Injection bookkeeping: determinism, Hamming distance, and untouched
    /// servers under the default scope.
    #[test]
    fn injection_invariants(
        k in prop::sample::select(vec![4u32, 6, 8]),
        seed in any::<u64>(),
        removals in 0usize..4,
        additions in 0usize..4,
        swaps in 0usize..2,
    ) {
        let params = FatTreeParams::new(k).unwrap();
        let (g, _) = blueprint::generate_blueprint(params);
        let spec = MalfunctionSpec::new(seed)
            .removals(removals)
            .additions(additions)
            .swaps(swaps);
        let (out1, diff1) = inject(&g, &spec).unwrap();
        let (out2, diff2) = inject(&g, &spec).unwrap();
        prop_assert_eq!(&out1, &out2);
        prop_assert_eq!(&diff1, &diff2);
        prop_assert_eq!(diff1.x(), spec.x());
        prop_assert_eq!(g.hamming_distance(&out1).unwrap(), 2 * diff1.x());
        for v in 0..params.server_count() as u32 {
            prop_assert_eq!(out1.neighbors(v).len(), 1);
        }
    }

    /// The proof chain for steps 1-3: below k/2 edits, stripping and
    /// classification recover the true levels exactly.
    #[test]
    fn levels_recovered_below_half_k(
        k in prop::sample::select(vec![8u32, 12]),
        seed in any::<u64>(),
        x_pick in 0usize..16,
    ) {
        let params = FatTreeParams::new(k).unwrap();
        let x = x_pick % (k as usize / 2);
        let (g, _) = blueprint::generate_blueprint(params);
        let (physical, _) = inject(&g, &MalfunctionSpec::mixed(seed, x)).unwrap();
        let part = algo1::partition_levels(&physical, params).unwrap();
        let s = params.server_count() as u32;
        let e = params.edge_switch_count() as u32;
        let a = params.aggregate_count() as u32;
        prop_assert_eq!(part.servers, (0..s).collect::<Vec<u32>>());
        prop_assert_eq!(part.edges, (s..s + e).collect::<Vec<u32>>());
        prop_assert_eq!(part.aggregates, (s + e..s + e + a).collect::<Vec<u32>>());
        prop_assert_eq!(
            part.cores,
            (s + e + a..params.node_count() as u32).collect::<Vec<u32>>()
        );
    }

    /// Round trip below the bound: the plan undoes the injection, never
    /// using more steps than were injected, and the repaired graph
    /// verifies clean.
    #[test]
    fn detection_round_trip_below_half_k(
        k in prop::sample::select(vec![8u32, 12]),
        seed in any::<u64>(),
        x_pick in 0usize..16,
    ) {
        let params = FatTreeParams::new(k).unwrap();
        let x = x_pick % (k as usize / 2);
        let (g, _) = blueprint::generate_blueprint(params);
        let (physical, _) = inject(&g, &MalfunctionSpec::mixed(seed, x)).unwrap();
        let result = algo1::run_algo1(&physical, params).unwrap();
        prop_assert!(result.assignment.validate(params).is_ok());
        prop_assert!(result.plan.steps() <= x);
        let repaired = apply_fixation(&physical, &result.plan).unwrap();
        prop_assert!(verify_repaired(&repaired, params));
    }

    /// Below k/4 the row-hash pipeline never escapes and matches the
    /// similarity greedy's plan length.
    #[test]
    fn algorithms_agree_below_quarter_k(
        k in prop::sample::select(vec![8u32, 12, 16]),
        seed in any::<u64>(),
        x_pick in 0usize..16,
    ) {
        let params = FatTreeParams::new(k).unwrap();
        let x = x_pick % (k as usize / 4);
        let (g, _) = blueprint::generate_blueprint(params);
        let (physical, _) = inject(&g, &MalfunctionSpec::mixed(seed, x)).unwrap();
        let a1 = algo1::run_algo1(&physical, params).unwrap();
        match algo2::run_algo2(&physical, params).unwrap() {
            algo2::Algo2Outcome::Resolved { plan, assignment } => {
                prop_assert!(assignment.validate(params).is_ok());
                prop_assert_eq!(plan.steps(), a1.plan.steps());
            }
            algo2::Algo2Outcome::BoundExceeded { reason } => {
                return Err(TestCaseError::fail(format!(
                    "x={x} < k/4 escaped: {reason}"
                )));
            }
        }
    }

    /// Structural indistinguishability: permuting nodes within one role
    /// orbit leaves the implied adjacency unchanged.
    #[test]
    fn orbit_relabeling_is_invisible(
        k in prop::sample::select(vec![4u32, 6]),
        pick in any::<u64>(),
    ) {
        let params = FatTreeParams::new(k).unwrap();
        let roles = blueprint::canonical_roles(params);
        let baseline =
            blueprint::expected_adjacency(&RoleAssignment::new(roles.clone()), params).unwrap();
        // swap two devices holding the identical role
        let mut swapped = roles.clone();
        let i = (pick as usize) % roles.len();
        if let Some(j) = (0..roles.len()).find(|&j| j != i && roles[j] == roles[i]) {
            swapped.swap(i, j);
        }
        let relabeled =
            blueprint::expected_adjacency(&RoleAssignment::new(swapped), params).unwrap();
        prop_assert_eq!(baseline.hamming_distance(&relabeled).unwrap(), 0);
    }
}
