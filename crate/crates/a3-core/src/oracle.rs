//! Independent brute-force solvers certifying minimality at tiny scale.
//!
//! `mgdp_bruteforce` minimizes the adjacency difference over every
//! bijection of up to nine nodes. `fattree_minfix_search` exhausts all
//! FatTree(4) role assignments with branch-and-bound, so the fix-step
//! minimum it returns is ground truth rather than the output of the
//! algorithms under test.

use itertools::Itertools;

use crate::blueprint::{self, FatTreeParams, Role};
use crate::error::{Error, Result};
use crate::graph::DeviceGraph;

/// Largest node count the factorial bijection search accepts.
pub const MAX_BIJECTION_NODES: usize = 9;

/// Exhaustive minimum of the MGDP objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MgdpSolution {
    /// Minimal d(pi): ordered adjacency-entry disagreements.
    pub min_distance: usize,
    /// First bijection attaining it, in lexicographic order; maps nodes of
    /// the first graph to nodes of the second.
    pub bijection: Vec<u32>,
}

fn dense_adjacency(g: &DeviceGraph, n: usize) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        m[u as usize][v as usize] = true;
        m[v as usize][u as usize] = true;
    }
    m
}

/// Minimizes d(pi) over all bijections between the two node sets. Graphs
/// of unequal size are padded with edge-free vertices.
pub fn mgdp_bruteforce(g1: &DeviceGraph, g2: &DeviceGraph) -> Result<MgdpSolution> {
    let n = g1.n().max(g2.n());
    if n > MAX_BIJECTION_NODES {
        return Err(Error::SizeCap {
            n,
            max: MAX_BIJECTION_NODES,
        });
    }
    let a1 = dense_adjacency(g1, n);
    let a2 = dense_adjacency(g2, n);
    let mut best: Option<MgdpSolution> = None;
    for perm in (0..n).permutations(n) {
        let mut d = 0usize;
        for u in 0..n {
            for v in (u + 1)..n {
                if a1[u][v] != a2[perm[u]][perm[v]] {
                    d += 2;
                }
            }
        }
        if best.as_ref().map_or(true, |b| d < b.min_distance) {
            best = Some(MgdpSolution {
                min_distance: d,
                bijection: perm.iter().map(|&v| v as u32).collect(),
            });
            if d == 0 {
                break;
            }
        }
    }
    Ok(best.expect("at least one bijection"))
}

/// Checks d(pi) + 2 c(pi) = |E1| + |E2| with every term in the
/// ordered-pair convention. Algebraically this always holds; computing the
/// three terms independently catches bookkeeping bugs in d or c.
pub fn mces_identity_check(g1: &DeviceGraph, g2: &DeviceGraph, bijection: &[u32]) -> Result<bool> {
    if g1.n() != g2.n() || bijection.len() != g1.n() {
        return Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    let n = g1.n();
    let a1 = dense_adjacency(g1, n);
    let a2 = dense_adjacency(g2, n);
    let mut d = 0usize;
    let mut c = 0usize;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let x1 = a1[u][v];
            let x2 = a2[bijection[u] as usize][bijection[v] as usize];
            if x1 != x2 {
                d += 1;
            }
            if x1 && x2 {
                c += 1;
            }
        }
    }
    let e1 = 2 * g1.edge_count();
    let e2 = 2 * g2.edge_count();
    Ok(d + 2 * c == e1 + e2)
}

/// Slot table for the FatTree(4) assignment search: the role of each slot
/// and, for symmetry breaking, an earlier slot whose node id the candidate
/// must exceed.
struct SlotTable {
    roles: Vec<Role>,
    min_over: Vec<Option<usize>>,
    expected: Vec<Vec<bool>>,
    agg_range: std::ops::Range<usize>,
}

fn k4_slot_table() -> SlotTable {
    let params = FatTreeParams::new(4).expect("k=4 valid");
    let mut roles = Vec::with_capacity(36);
    let mut min_over = Vec::with_capacity(36);

    // core groups: unordered within, group 1 anchored by the smaller id
    roles.push(Role::Core { group: 1 });
    min_over.push(None);
    roles.push(Role::Core { group: 1 });
    min_over.push(Some(0));
    roles.push(Role::Core { group: 2 });
    min_over.push(Some(0));
    roles.push(Role::Core { group: 2 });
    min_over.push(Some(2));

    // aggregates pod by pod; pods are interchangeable, so the index-1
    // aggregate ids ascend across pods
    for pod in 1..=4u32 {
        roles.push(Role::Aggregate { group: pod, index: 1 });
        min_over.push(if pod == 1 { None } else { Some(4 + 2 * (pod as usize - 2)) });
        roles.push(Role::Aggregate { group: pod, index: 2 });
        min_over.push(None);
    }
    // edge switches; the two indexes within a pod swap together with their
    // server groups, so order them by id
    for pod in 1..=4u32 {
        let first = roles.len();
        roles.push(Role::Edge { group: pod, index: 1 });
        min_over.push(None);
        roles.push(Role::Edge { group: pod, index: 2 });
        min_over.push(Some(first));
    }
    // servers, two unordered slots per group
    for group in 1..=8u32 {
        let first = roles.len();
        roles.push(Role::Server { group });
        min_over.push(None);
        roles.push(Role::Server { group });
        min_over.push(Some(first));
    }

    let expected: Vec<Vec<bool>> = (0..36)
        .map(|i| (0..36).map(|j| params.connected(roles[i], roles[j])).collect())
        .collect();
    SlotTable {
        roles,
        min_over,
        expected,
        agg_range: 4..12,
    }
}

struct Search<'a> {
    table: &'a SlotTable,
    adj: Vec<Vec<bool>>,
    placed: Vec<u32>,
    used: Vec<bool>,
    incumbent: usize,
    slack: usize,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    /// Mismatches the candidate adds against everything already placed.
    fn placement_cost(&self, slot: usize, node: u32) -> usize {
        let mut cost = 0;
        for (t, &other) in self.placed.iter().enumerate() {
            if self.table.expected[slot][t] != self.adj[node as usize][other as usize] {
                cost += 1;
            }
        }
        cost
    }

    /// Admissible bound: every unfilled aggregate slot will pay at least
    /// its cheapest candidate's cost against the current prefix.
    fn remaining_aggregate_bound(&self, next_slot: usize) -> usize {
        if !self.table.agg_range.contains(&next_slot) {
            return 0;
        }
        let mut bound = 0;
        for slot in next_slot..self.table.agg_range.end {
            let mut cheapest = usize::MAX;
            for node in 0..self.adj.len() as u32 {
                if self.used[node as usize] {
                    continue;
                }
                cheapest = cheapest.min(self.placement_cost(slot, node));
                if cheapest == 0 {
                    break;
                }
            }
            if cheapest == usize::MAX {
                return usize::MAX;
            }
            bound += cheapest;
        }
        bound
    }

    fn dfs(&mut self, slot: usize, partial: usize) -> Result<()> {
        if slot == self.table.roles.len() {
            if partial < self.incumbent {
                self.incumbent = partial;
            }
            return Ok(());
        }
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded {
                explored: self.visited,
                budget: self.budget,
            });
        }
        let floor = self.table.min_over[slot].map(|t| self.placed[t]);
        let mut candidates: Vec<(usize, u32)> = (0..self.adj.len() as u32)
            .filter(|&n| !self.used[n as usize] && floor.map_or(true, |f| n > f))
            .map(|n| (self.placement_cost(slot, n), n))
            .collect();
        candidates.sort_unstable();
        for (cost, node) in candidates {
            let next = partial + cost;
            if next >= self.incumbent + self.slack {
                continue;
            }
            self.placed.push(node);
            self.used[node as usize] = true;
            let bound = self.remaining_aggregate_bound(slot + 1);
            if bound != usize::MAX && next + bound < self.incumbent + self.slack {
                self.dfs(slot + 1, next)?;
            }
            self.used[node as usize] = false;
            self.placed.pop();
        }
        Ok(())
    }
}

/// Exhaustive minimum fix-step count for a 36-node graph against all
/// FatTree(4) role assignments, branch-and-bound over cores, aggregates,
/// edges, then servers. `budget` caps visited search nodes.
pub fn fattree_minfix_search(g: &DeviceGraph, budget: u64) -> Result<usize> {
    fattree_minfix_search_loose(g, budget, 0)
}

/// Same search with pruning loosened by `slack` extra steps: branches are
/// kept while their partial cost is within `slack` of the incumbent. The
/// returned minimum must not depend on `slack`.
pub fn fattree_minfix_search_loose(g: &DeviceGraph, budget: u64, slack: usize) -> Result<usize> {
    let params = FatTreeParams::new(4).expect("k=4 valid");
    if g.n() != params.node_count() {
        return Err(Error::InputShape(format!(
            "{} nodes, expected 36 for the FatTree(4) search",
            g.n()
        )));
    }
    // any valid assignment bounds the minimum; the canonical one is free
    let (canonical, _) = blueprint::generate_blueprint(params);
    let seed_cost = g.hamming_distance(&canonical).expect("sizes match") / 2;

    let table = k4_slot_table();
    let mut search = Search {
        table: &table,
        adj: dense_adjacency(g, g.n()),
        placed: Vec::with_capacity(36),
        used: vec![false; 36],
        incumbent: seed_cost + 1,
        slack,
        visited: 0,
        budget,
    };
    search.dfs(0, 0)?;
    Ok(search.incumbent.min(seed_cost))
}

/// Default search budget: ample for graphs within a few edits of a
/// FatTree(4).
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo1::run_algo1;
    use crate::blueprint::generate_blueprint;
    use crate::injector::degree_preserving_miswire;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> DeviceGraph {
        let mut g = DeviceGraph::new(n);
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.random_bool(p) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    }

    fn permuted(g: &DeviceGraph, perm: &[u32]) -> DeviceGraph {
        let edges: Vec<(u32, u32)> = g
            .edges()
            .map(|(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        DeviceGraph::with_edges(g.n(), &edges).unwrap()
    }

    #[test]
    fn isomorphic_graphs_have_zero_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(8, 0.4, &mut rng);
        let perm = [5u32, 2, 7, 0, 3, 6, 1, 4];
        let h = permuted(&g, &perm);
        let sol = mgdp_bruteforce(&g, &h).unwrap();
        assert_eq!(sol.min_distance, 0);
    }

    #[test]
    fn one_missing_edge_costs_two_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_graph(7, 0.5, &mut rng);
        let mut h = g.clone();
        let (u, v) = g.edges().next().unwrap();
        h.remove_edge(u, v).unwrap();
        let sol = mgdp_bruteforce(&g, &h).unwrap();
        assert_eq!(sol.min_distance, 2);
    }

    #[test]
    fn bruteforce_is_symmetric_in_its_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_graph(6, 0.4, &mut rng);
        let h = random_graph(6, 0.5, &mut rng);
        assert_eq!(
            mgdp_bruteforce(&g, &h).unwrap().min_distance,
            mgdp_bruteforce(&h, &g).unwrap().min_distance
        );
    }

    #[test]
    fn unequal_sizes_are_padded_with_free_vertices() {
        let g = DeviceGraph::with_edges(3, &[(0, 1)]).unwrap();
        let h = DeviceGraph::with_edges(5, &[(2, 4)]).unwrap();
        let sol = mgdp_bruteforce(&g, &h).unwrap();
        assert_eq!(sol.min_distance, 0);
        assert_eq!(sol.bijection.len(), 5);
    }

    #[test]
    fn oversized_inputs_are_rejected() {
        let g = DeviceGraph::new(10);
        assert!(matches!(
            mgdp_bruteforce(&g, &g),
            Err(Error::SizeCap { n: 10, .. })
        ));
    }

    #[test]
    fn identity_holds_for_returned_and_random_bijections() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let g = random_graph(7, 0.4, &mut rng);
            let h = random_graph(7, 0.5, &mut rng);
            let sol = mgdp_bruteforce(&g, &h).unwrap();
            assert!(mces_identity_check(&g, &h, &sol.bijection).unwrap());
            assert!(mces_identity_check(&g, &h, &[0, 1, 2, 3, 4, 5, 6]).unwrap());
        }
    }

    #[test]
    fn identity_on_identical_graphs_under_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(6, 0.5, &mut rng);
        assert!(mces_identity_check(&g, &g, &[0, 1, 2, 3, 4, 5]).unwrap());
    }

    #[test]
    fn clean_fattree_needs_zero_fix_steps() {
        let (g, _) = generate_blueprint(FatTreeParams::new(4).unwrap());
        assert_eq!(fattree_minfix_search(&g, DEFAULT_SEARCH_BUDGET).unwrap(), 0);
    }

    #[test]
    fn one_removed_link_needs_one_fix_step() {
        let (g, _) = generate_blueprint(FatTreeParams::new(4).unwrap());
        let mut damaged = g.clone();
        damaged.remove_edge(16, 24).unwrap();
        assert_eq!(
            fattree_minfix_search(&damaged, DEFAULT_SEARCH_BUDGET).unwrap(),
            1
        );
    }

    #[test]
    fn crosswise_swap_needs_four_steps_and_bounds_the_detector() {
        let p = FatTreeParams::new(4).unwrap();
        let (g, _) = generate_blueprint(p);
        let (physical, _) = degree_preserving_miswire(&g, 3).unwrap();
        let min = fattree_minfix_search(&physical, DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(min, 4);
        let detected = run_algo1(&physical, p).unwrap();
        assert!(min <= detected.plan.steps());
    }

    #[test]
    fn loosened_pruning_returns_the_same_minimum() {
        let p = FatTreeParams::new(4).unwrap();
        let (g, _) = generate_blueprint(p);
        let mut damaged = g.clone();
        damaged.remove_edge(24, 32).unwrap();
        let tight = fattree_minfix_search(&damaged, DEFAULT_SEARCH_BUDGET).unwrap();
        let loose =
            fattree_minfix_search_loose(&damaged, DEFAULT_SEARCH_BUDGET, 2).unwrap();
        assert_eq!(tight, loose);
        assert_eq!(tight, 1);
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let (g, _) = generate_blueprint(FatTreeParams::new(4).unwrap());
        let mut damaged = g.clone();
        damaged.remove_edge(16, 24).unwrap();
        damaged.add_edge(16, 32).unwrap();
        assert!(matches!(
            fattree_minfix_search(&damaged, 5),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn wrong_size_is_rejected() {
        let g = DeviceGraph::new(20);
        assert!(fattree_minfix_search(&g, 1000).is_err());
    }
}
