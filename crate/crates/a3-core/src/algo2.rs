//! Row-hash role assignment, exact for fewer than k/4 undirected link
//! malfunctions and a factor k^3 cheaper than the similarity greedy.
//!
//! Switch rows are fingerprinted and grouped by exact row equality. Groups
//! of k/2 identical rows pin down core groups and pods; aggregates are the
//! switches wired into those groups; whatever is left joins the incomplete
//! group it most resembles. Any structural check that fails — or a plan
//! longer than 2*(k/4 - 1) matrix entries — means the malfunction count is
//! at or past k/4, reported as [`Algo2Outcome::BoundExceeded`] so the
//! caller can fall back to the similarity algorithm.

use std::collections::HashMap;

use crate::algo1::{assemble_assignment, AggPlacement, StripResult};
use crate::blueprint::{FatTreeParams, Role, RoleAssignment};
use crate::error::{Error, Result};
use crate::fixation::{self, FixationPlan};
use crate::graph::{BitRows, DeviceGraph};

/// Whether a row group has its full complement of k/2 members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStatus {
    Correct,
    Incomplete,
}

/// Level label derived from a group's shared degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Core,
    Edge,
    Malfunction,
    Unlabeled,
}

/// Switch nodes sharing one exact adjacency row.
#[derive(Debug, Clone)]
pub struct RowGroup {
    pub members: Vec<u32>,
    pub fingerprint: u64,
    pub status: GroupStatus,
    pub kind: GroupKind,
}

/// Either a full detection result or the bound-exceeded escape.
#[derive(Debug, Clone)]
pub enum Algo2Outcome {
    Resolved {
        assignment: RoleAssignment,
        plan: FixationPlan,
    },
    BoundExceeded {
        reason: String,
    },
}

impl Algo2Outcome {
    pub fn bound_exceeded(&self) -> bool {
        matches!(self, Algo2Outcome::BoundExceeded { .. })
    }
}

/// One pipeline stage: either a value or the bound-exceeded escape.
#[derive(Debug)]
pub enum Step<T> {
    Done(T),
    BoundExceeded(String),
}

impl<T> Step<T> {
    pub fn done(self) -> Option<T> {
        match self {
            Step::Done(t) => Some(t),
            Step::BoundExceeded(_) => None,
        }
    }
}

macro_rules! step {
    ($e:expr) => {
        match $e {
            Step::Done(t) => t,
            Step::BoundExceeded(reason) => {
                return Ok(Algo2Outcome::BoundExceeded { reason })
            }
        }
    };
}

/// Removes every node of degree at most k/4. A blueprint sheds exactly its
/// k^3/4 servers; any other count means a switch was dragged below the
/// threshold or a server rose above it, which takes at least k/4 edits.
pub fn strip_low_degree(g: &DeviceGraph, params: FatTreeParams) -> Result<Step<StripResult>> {
    if g.n() != params.node_count() {
        return Err(Error::InputShape(format!(
            "{} nodes, expected {} for FatTree({})",
            g.n(),
            params.node_count(),
            params.k()
        )));
    }
    let k = params.k() as usize;
    let mut servers = Vec::with_capacity(params.server_count());
    let mut switches = Vec::with_capacity(params.switch_count());
    for v in 0..g.n() as u32 {
        if 4 * g.neighbors(v).len() <= k {
            servers.push(v);
        } else {
            switches.push(v);
        }
    }
    if servers.len() != params.server_count() {
        return Ok(Step::BoundExceeded(format!(
            "{} nodes of degree <= k/4, expected {} servers",
            servers.len(),
            params.server_count()
        )));
    }
    let (switch_graph, switch_to_device) = g.induced_subgraph(&switches);
    Ok(Step::Done(StripResult {
        switch_graph,
        servers,
        switch_to_device,
    }))
}

/// Groups switch nodes by exact row equality, fingerprints as a
/// pre-filter. Groups are ordered by smallest member; a group is Correct
/// iff it holds exactly k/2 nodes.
pub fn group_rows(sw: &DeviceGraph, params: FatTreeParams) -> Vec<RowGroup> {
    let half = params.half() as usize;
    let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
    for v in 0..sw.n() as u32 {
        let fp = sw.row_fingerprint(v).expect("node in range");
        buckets.entry(fp).or_default().push(v);
    }
    let mut groups = Vec::new();
    for (fp, bucket) in buckets {
        // resolve fingerprint collisions by exact row comparison
        let mut rest = bucket;
        while let Some(&head) = rest.first() {
            let (same, other): (Vec<u32>, Vec<u32>) = rest
                .into_iter()
                .partition(|&v| sw.neighbors(v) == sw.neighbors(head));
            groups.push(RowGroup {
                status: if same.len() == half {
                    GroupStatus::Correct
                } else {
                    GroupStatus::Incomplete
                },
                members: same,
                fingerprint: fp,
                kind: GroupKind::Unlabeled,
            });
            rest = other;
        }
    }
    groups.sort_unstable_by_key(|g| g.members[0]);
    groups
}

/// Labels each multi-member group by its shared switch-graph degree:
/// k means core, k/2 means edge, anything else is a malfunction group.
/// Singleton rows stay unlabeled — an untouched aggregate row is unique
/// and has degree k exactly like a core, so degree alone cannot place it.
pub fn label_groups(
    mut groups: Vec<RowGroup>,
    sw: &DeviceGraph,
    params: FatTreeParams,
) -> Vec<RowGroup> {
    let k = params.k() as usize;
    for group in &mut groups {
        if group.members.len() < 2 {
            continue;
        }
        let degree = sw.neighbors(group.members[0]).len();
        group.kind = if degree == k {
            GroupKind::Core
        } else if degree == k / 2 {
            GroupKind::Edge
        } else {
            GroupKind::Malfunction
        };
    }
    groups
}

/// Aggregate labelling derived from the core and edge groups, plus the
/// groups themselves ordered as pods 1..=k and core groups 1..=k/2.
#[derive(Debug, Clone)]
pub struct DerivedRoles {
    /// Per switch node: pod claimed via edge-group adjacency.
    pub pod: Vec<Option<u32>>,
    /// Per switch node: index claimed via core-group adjacency.
    pub index: Vec<Option<u32>>,
    /// Switch nodes holding both fields, ascending.
    pub aggregates: Vec<u32>,
    /// Edge-kind groups by smallest member; position+1 is the pod id.
    pub edge_groups: Vec<Vec<u32>>,
    /// Core-kind groups by smallest member; position+1 is the group id.
    pub core_groups: Vec<Vec<u32>>,
}

/// Finds the aggregates: every switch wired into an edge group gets that
/// pod, every switch wired into a core group gets that index. "Wired into"
/// means strictly more than k/4 links — a true aggregate keeps more than
/// k/4 links into each of its groups within the bound, while no other
/// switch can reach that many. Escapes when the group counts are off, a
/// claim conflicts, or the aggregates do not number k^2/2 with both
/// fields.
pub fn derive_aggregates(
    groups: &[RowGroup],
    sw: &DeviceGraph,
    params: FatTreeParams,
) -> Result<Step<DerivedRoles>> {
    let k = params.k() as usize;
    let half = params.half() as usize;

    let edge_groups: Vec<Vec<u32>> = groups
        .iter()
        .filter(|g| g.kind == GroupKind::Edge)
        .map(|g| g.members.clone())
        .collect();
    let core_groups: Vec<Vec<u32>> = groups
        .iter()
        .filter(|g| g.kind == GroupKind::Core)
        .map(|g| g.members.clone())
        .collect();
    if edge_groups.len() != k {
        return Ok(Step::BoundExceeded(format!(
            "{} edge groups found, expected {k}",
            edge_groups.len()
        )));
    }
    if core_groups.len() != half {
        return Ok(Step::BoundExceeded(format!(
            "{} core groups found, expected {half}",
            core_groups.len()
        )));
    }

    let mut labeled = vec![false; sw.n()];
    for group in groups {
        if matches!(group.kind, GroupKind::Edge | GroupKind::Core) {
            for &v in &group.members {
                labeled[v as usize] = true;
            }
        }
    }

    // claim fields by counting links into each group
    let claim = |member_of: &[Option<u32>]| -> Step<Vec<Option<u32>>> {
        let mut field: Vec<Option<u32>> = vec![None; sw.n()];
        let mut counts: Vec<usize> = vec![0; k];
        for v in 0..sw.n() as u32 {
            let mut touched = Vec::new();
            for &w in sw.neighbors(v) {
                if let Some(gi) = member_of[w as usize] {
                    if counts[gi as usize] == 0 {
                        touched.push(gi);
                    }
                    counts[gi as usize] += 1;
                }
            }
            for &gi in &touched {
                if 4 * counts[gi as usize] > k {
                    if field[v as usize].is_some() {
                        return Step::BoundExceeded(format!(
                            "switch {v} is wired into two groups"
                        ));
                    }
                    field[v as usize] = Some(gi + 1);
                }
                counts[gi as usize] = 0;
            }
        }
        Step::Done(field)
    };

    let mut edge_member: Vec<Option<u32>> = vec![None; sw.n()];
    for (gi, group) in edge_groups.iter().enumerate() {
        for &v in group {
            edge_member[v as usize] = Some(gi as u32);
        }
    }
    let mut core_member: Vec<Option<u32>> = vec![None; sw.n()];
    for (gi, group) in core_groups.iter().enumerate() {
        for &v in group {
            core_member[v as usize] = Some(gi as u32);
        }
    }

    let pod = match claim(&edge_member) {
        Step::Done(f) => f,
        Step::BoundExceeded(r) => return Ok(Step::BoundExceeded(r)),
    };
    let index = match claim(&core_member) {
        Step::Done(f) => f,
        Step::BoundExceeded(r) => return Ok(Step::BoundExceeded(r)),
    };

    let mut aggregates = Vec::with_capacity(k * half);
    for v in 0..sw.n() {
        match (pod[v], index[v]) {
            (Some(_), Some(_)) => {
                if labeled[v] {
                    return Ok(Step::BoundExceeded(format!(
                        "switch {v} is both a group member and an aggregate"
                    )));
                }
                aggregates.push(v as u32);
            }
            (None, None) => {}
            _ => {
                return Ok(Step::BoundExceeded(format!(
                    "aggregate candidate {v} is missing a pod or index"
                )))
            }
        }
    }
    if aggregates.len() != k * half {
        return Ok(Step::BoundExceeded(format!(
            "{} aggregates derived, expected {}",
            aggregates.len(),
            k * half
        )));
    }

    Ok(Step::Done(DerivedRoles {
        pod,
        index,
        aggregates,
        edge_groups,
        core_groups,
    }))
}

/// Majority-rule repair: every switch that is neither an aggregate nor a
/// core/edge group member joins the incomplete group it is most similar
/// to (one representative per group, ties to the earliest group), until
/// every group holds k/2 nodes. Escapes when the counts cannot balance.
pub fn resolve_malfunction_nodes(
    derived: &DerivedRoles,
    original: &DeviceGraph,
    strip: &StripResult,
    params: FatTreeParams,
) -> Result<Step<RoleAssignment>> {
    let sw = &strip.switch_graph;
    let half = params.half() as usize;

    let mut resolved = vec![false; sw.n()];
    for &v in &derived.aggregates {
        resolved[v as usize] = true;
    }
    for group in derived.edge_groups.iter().chain(&derived.core_groups) {
        for &v in group {
            resolved[v as usize] = true;
        }
    }
    let unresolved: Vec<u32> = (0..sw.n() as u32)
        .filter(|&v| !resolved[v as usize])
        .collect();

    let mut edge_groups = derived.edge_groups.clone();
    let mut core_groups = derived.core_groups.clone();
    let mut missing = 0usize;
    for group in edge_groups.iter().chain(&core_groups) {
        if group.len() > half {
            return Ok(Step::BoundExceeded(format!(
                "a row group holds {} nodes, more than k/2",
                group.len()
            )));
        }
        missing += half - group.len();
    }
    if missing != unresolved.len() {
        return Ok(Step::BoundExceeded(format!(
            "{} unplaced switches for {} open slots",
            unresolved.len(),
            missing
        )));
    }

    if !unresolved.is_empty() {
        let bits = BitRows::from_graph(sw);
        for v in unresolved {
            let mut best: Option<(usize, bool, usize)> = None; // (score, is_core, pos)
            for (pos, group) in edge_groups.iter().enumerate() {
                if group.len() >= half {
                    continue;
                }
                let score = bits.and_count(v, group[0]);
                if best.map_or(true, |(bs, _, _)| score > bs) {
                    best = Some((score, false, pos));
                }
            }
            for (pos, group) in core_groups.iter().enumerate() {
                if group.len() >= half {
                    continue;
                }
                let score = bits.and_count(v, group[0]);
                if best.map_or(true, |(bs, _, _)| score > bs) {
                    best = Some((score, true, pos));
                }
            }
            match best {
                Some((_, true, pos)) => core_groups[pos].push(v),
                Some((_, false, pos)) => edge_groups[pos].push(v),
                None => {
                    return Ok(Step::BoundExceeded(
                        "unplaced switch but every group is full".into(),
                    ))
                }
            }
        }
    }
    for group in edge_groups.iter_mut().chain(core_groups.iter_mut()) {
        group.sort_unstable();
    }

    let placements: Vec<AggPlacement> = derived
        .aggregates
        .iter()
        .map(|&v| AggPlacement {
            node: v,
            pod: derived.pod[v as usize].expect("aggregate has pod"),
            index: derived.index[v as usize].expect("aggregate has index"),
        })
        .collect();
    let assignment = match assemble_assignment(
        original,
        strip,
        &edge_groups,
        &core_groups,
        &placements,
        params,
    ) {
        Ok(a) => a,
        Err(e) => return Ok(Step::BoundExceeded(format!("assembly failed: {e}"))),
    };
    if let Err(e) = assignment.validate(params) {
        return Ok(Step::BoundExceeded(format!("assignment invalid: {e}")));
    }
    Ok(Step::Done(assignment))
}

/// The whole pipeline. Within the k/4 bound the returned plan is minimal;
/// otherwise some stage escapes or the plan itself exceeds 2*(k/4 - 1)
/// matrix entries and the outcome is BoundExceeded. Edge switches whose
/// server count disagrees with the blueprint are reported as advisory
/// server-fault entries.
pub fn run_algo2(g: &DeviceGraph, params: FatTreeParams) -> Result<Algo2Outcome> {
    let strip = step!(strip_low_degree(g, params)?);
    let groups = group_rows(&strip.switch_graph, params);
    let groups = label_groups(groups, &strip.switch_graph, params);
    let derived = step!(derive_aggregates(&groups, &strip.switch_graph, params)?);
    let assignment = step!(resolve_malfunction_nodes(&derived, g, &strip, params)?);

    let mut plan = fixation::compute_fixation(g, &assignment, params)?;
    // plan entries (2 per step) beyond 2*(k/4 - 1) mean x >= k/4
    if 4 * plan.steps() > (params.k() as usize).saturating_sub(4) {
        return Ok(Algo2Outcome::BoundExceeded {
            reason: format!(
                "fixation needs {} steps, beyond the k/4 bound",
                plan.steps()
            ),
        });
    }

    // server-side count check against the original graph
    let is_server: Vec<bool> = {
        let mut flags = vec![false; g.n()];
        for &s in &strip.servers {
            flags[s as usize] = true;
        }
        flags
    };
    let half = params.half();
    for (v, role) in assignment.roles().iter().enumerate() {
        if matches!(role, Role::Edge { .. }) {
            let actual = g
                .neighbors(v as u32)
                .iter()
                .filter(|&&w| is_server[w as usize])
                .count() as u32;
            if actual != half {
                plan.push_server_fault(v as u32, half, actual);
            }
        }
    }

    Ok(Algo2Outcome::Resolved { assignment, plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo1::run_algo1;
    use crate::blueprint::generate_blueprint;
    use crate::fixation::{apply_fixation, verify_repaired, FixAction};
    use crate::injector::{inject, MalfunctionSpec, Scope};

    fn params(k: u32) -> FatTreeParams {
        FatTreeParams::new(k).unwrap()
    }

    fn strip(g: &DeviceGraph, p: FatTreeParams) -> StripResult {
        strip_low_degree(g, p).unwrap().done().expect("in bound")
    }

    #[test]
    fn strip_sheds_exactly_the_servers_when_clean() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        let s = strip(&g, p);
        assert_eq!(s.servers.len(), 128);
        assert_eq!(s.switch_graph.n(), 80);
    }

    #[test]
    fn strip_survives_one_switch_link_removal() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        let (physical, _) = inject(&g, &MalfunctionSpec::new(2).removals(1)).unwrap();
        let s = strip(&physical, p);
        assert_eq!(s.servers, (0..128).collect::<Vec<u32>>());
    }

    #[test]
    fn strip_escapes_when_an_edge_switch_drops_to_low_degree() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        // cut six of the first edge switch's eight links: degree 2 <= k/4
        let mut physical = g.clone();
        let victims: Vec<u32> = physical.neighbors(128).iter().copied().take(6).collect();
        for w in victims {
            physical.remove_edge(128, w).unwrap();
        }
        match strip_low_degree(&physical, p).unwrap() {
            Step::BoundExceeded(reason) => assert!(reason.contains("129")),
            Step::Done(_) => panic!("expected an escape"),
        }
    }

    #[test]
    fn clean_k4_rows_group_into_cores_edges_and_aggregate_singletons() {
        let p = params(4);
        let (g, _) = generate_blueprint(p);
        let s = strip(&g, p);
        let groups = group_rows(&s.switch_graph, p);
        let pairs = groups.iter().filter(|g| g.members.len() == 2).count();
        let singles = groups.iter().filter(|g| g.members.len() == 1).count();
        assert_eq!((pairs, singles), (6, 8));
        assert!(groups
            .iter()
            .filter(|g| g.members.len() == 2)
            .all(|g| g.status == GroupStatus::Correct));

        let labeled = label_groups(groups, &s.switch_graph, p);
        let cores = labeled.iter().filter(|g| g.kind == GroupKind::Core).count();
        let edges = labeled.iter().filter(|g| g.kind == GroupKind::Edge).count();
        let unlabeled = labeled
            .iter()
            .filter(|g| g.kind == GroupKind::Unlabeled)
            .count();
        assert_eq!((cores, edges, unlabeled), (2, 4, 8));
    }

    #[test]
    fn a_cut_core_link_leaves_an_incomplete_group() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        let mut physical = g.clone();
        // cut the first core's link to its first aggregate
        let core = 192u32;
        let &agg = physical.neighbors(core).first().unwrap();
        physical.remove_edge(core, agg).unwrap();
        let s = strip(&physical, p);
        let groups = group_rows(&s.switch_graph, p);
        let incomplete: Vec<&RowGroup> = groups
            .iter()
            .filter(|g| g.members.len() == 3)
            .collect();
        assert_eq!(incomplete.len(), 1);
        assert_eq!(incomplete[0].status, GroupStatus::Incomplete);
    }

    #[test]
    fn empty_graph_has_no_groups() {
        let groups = group_rows(&DeviceGraph::new(0), params(4));
        assert!(groups.is_empty());
    }

    #[test]
    fn malfunction_kind_for_shared_degraded_rows() {
        let p = params(4);
        let (g, _) = generate_blueprint(p);
        // cores 32,33 both lose their link to aggregate 24: rows stay equal
        let mut physical = g.clone();
        physical.remove_edge(32, 24).unwrap();
        physical.remove_edge(33, 24).unwrap();
        let s = strip(&physical, p);
        let groups = label_groups(group_rows(&s.switch_graph, p), &s.switch_graph, p);
        assert!(groups
            .iter()
            .any(|g| g.kind == GroupKind::Malfunction && g.members.len() == 2));
    }

    #[test]
    fn clean_k4_derives_all_eight_aggregates() {
        let p = params(4);
        let (g, _) = generate_blueprint(p);
        let s = strip(&g, p);
        let groups = label_groups(group_rows(&s.switch_graph, p), &s.switch_graph, p);
        let derived = derive_aggregates(&groups, &s.switch_graph, p)
            .unwrap()
            .done()
            .expect("in bound");
        assert_eq!(derived.aggregates.len(), 8);
        assert_eq!(derived.edge_groups.len(), 4);
        assert_eq!(derived.core_groups.len(), 2);
    }

    #[test]
    fn one_edit_still_labels_every_aggregate_at_k8() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        for seed in 0..4 {
            let (physical, _) = inject(&g, &MalfunctionSpec::new(seed).removals(1)).unwrap();
            let s = strip(&physical, p);
            let groups = label_groups(group_rows(&s.switch_graph, p), &s.switch_graph, p);
            let derived = derive_aggregates(&groups, &s.switch_graph, p)
                .unwrap()
                .done()
                .expect("x=1 is within bound at k=8");
            assert_eq!(derived.aggregates.len(), 32);
        }
    }

    #[test]
    fn collapsed_edge_group_escapes() {
        let p = params(4);
        let (g, _) = generate_blueprint(p);
        // cut one aggregate link from the first pod's first edge switch:
        // both pod-1 edge rows become unique, the pod group vanishes
        let mut physical = g.clone();
        physical.remove_edge(16, 24).unwrap();
        let s = strip(&physical, p);
        let groups = label_groups(group_rows(&s.switch_graph, p), &s.switch_graph, p);
        match derive_aggregates(&groups, &s.switch_graph, p).unwrap() {
            Step::BoundExceeded(reason) => assert!(reason.contains("edge groups")),
            Step::Done(_) => panic!("expected an escape"),
        }
    }

    #[test]
    fn degraded_core_rejoins_its_group_by_similarity() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        let mut physical = g.clone();
        let core = 192u32;
        let &agg = physical.neighbors(core).first().unwrap();
        physical.remove_edge(core, agg).unwrap();

        let s = strip(&physical, p);
        let bits = BitRows::from_graph(&s.switch_graph);
        let groups = label_groups(group_rows(&s.switch_graph, p), &s.switch_graph, p);
        let derived = derive_aggregates(&groups, &s.switch_graph, p)
            .unwrap()
            .done()
            .unwrap();
        // the degraded core keeps k-1 shared neighbors with its old group
        let damaged: Vec<u32> = (0..s.switch_graph.n() as u32)
            .filter(|&v| {
                s.switch_to_device[v as usize] == core
            })
            .collect();
        let incomplete: &Vec<u32> = derived
            .core_groups
            .iter()
            .find(|g| g.len() == 3)
            .expect("one incomplete core group");
        assert_eq!(bits.and_count(damaged[0], incomplete[0]), 7);

        let assignment = resolve_malfunction_nodes(&derived, &physical, &s, p)
            .unwrap()
            .done()
            .expect("in bound");
        assert!(assignment.validate(p).is_ok());
        let plan = fixation::compute_fixation(&physical, &assignment, p).unwrap();
        assert_eq!(plan.steps(), 1);
    }

    #[test]
    fn resolve_with_nothing_unresolved_is_identity_shaped() {
        let p = params(4);
        let (g, _) = generate_blueprint(p);
        let s = strip(&g, p);
        let groups = label_groups(group_rows(&s.switch_graph, p), &s.switch_graph, p);
        let derived = derive_aggregates(&groups, &s.switch_graph, p)
            .unwrap()
            .done()
            .unwrap();
        let assignment = resolve_malfunction_nodes(&derived, &g, &s, p)
            .unwrap()
            .done()
            .unwrap();
        let expected = crate::blueprint::expected_adjacency(&assignment, p).unwrap();
        assert_eq!(expected.hamming_distance(&g).unwrap(), 0);
    }

    #[test]
    fn single_edit_recovery_matches_ground_truth_at_k8() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        for seed in 0..6 {
            let (physical, diff) =
                inject(&g, &MalfunctionSpec::mixed(seed, 1)).unwrap();
            match run_algo2(&physical, p).unwrap() {
                Algo2Outcome::Resolved { plan, .. } => {
                    assert_eq!(plan.steps(), diff.x(), "seed {seed}");
                    let repaired = apply_fixation(&physical, &plan).unwrap();
                    assert!(verify_repaired(&repaired, p));
                }
                Algo2Outcome::BoundExceeded { reason } => {
                    panic!("x=1 < k/4 escaped: {reason}")
                }
            }
        }
    }

    #[test]
    fn clean_outcome_matches_the_similarity_algorithm() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        let outcome = run_algo2(&g, p).unwrap();
        let a1 = run_algo1(&g, p).unwrap();
        match outcome {
            Algo2Outcome::Resolved { plan, .. } => {
                assert!(plan.is_empty());
                assert_eq!(plan.steps(), a1.plan.steps());
            }
            Algo2Outcome::BoundExceeded { reason } => panic!("clean input escaped: {reason}"),
        }
    }

    #[test]
    fn long_plans_escape_the_bound() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        // x = 3 >= k/4 = 2: either a stage escapes or the plan is too long
        let (physical, _) = inject(&g, &MalfunctionSpec::new(40).removals(3)).unwrap();
        match run_algo2(&physical, p).unwrap() {
            Algo2Outcome::BoundExceeded { .. } => {}
            Algo2Outcome::Resolved { plan, .. } => {
                // 4*steps must stay within k-4
                assert!(4 * plan.steps() <= 4);
                let repaired = apply_fixation(&physical, &plan).unwrap();
                assert!(verify_repaired(&repaired, p));
            }
        }
    }

    #[test]
    fn missing_server_links_become_advisory_faults() {
        let p = params(8);
        let (g, _) = generate_blueprint(p);
        let mut physical = g.clone();
        // drop one server's only link
        physical.remove_edge(0, 128).unwrap();
        match run_algo2(&physical, p).unwrap() {
            Algo2Outcome::Resolved { plan, .. } => {
                let faults: Vec<&FixAction> = plan
                    .actions()
                    .iter()
                    .filter(|a| matches!(a, FixAction::ServerFault { .. }))
                    .collect();
                assert_eq!(faults.len(), 1);
                assert!(matches!(
                    faults[0],
                    FixAction::ServerFault {
                        expected: 4,
                        actual: 3,
                        ..
                    }
                ));
            }
            Algo2Outcome::BoundExceeded { reason } => panic!("escaped: {reason}"),
        }
    }
}
