//! Degree- and similarity-driven role assignment, exact for fewer than k/2
//! undirected link malfunctions.
//!
//! The pipeline strips servers by degree, splits the switch graph into
//! levels, groups edge and core switches by row similarity, then greedily
//! fills every aggregate role by common-neighbor count against the role's
//! expected neighborhood. Output is always a feasible assignment; within
//! the bound it yields the minimum fixation. All ties break by smallest
//! node id so identical inputs give identical outputs.

use crate::blueprint::{FatTreeParams, Role, RoleAssignment};
use crate::error::{Error, Result};
use crate::fixation::{self, FixationPlan};
use crate::graph::{BitRows, DeviceGraph};

/// Result of stripping the server layer: the induced switch graph, the
/// stripped server ids, and the switch-id -> device-id remap table.
#[derive(Debug, Clone)]
pub struct StripResult {
    pub switch_graph: DeviceGraph,
    pub servers: Vec<u32>,
    pub switch_to_device: Vec<u32>,
}

/// Switch-graph node ids split into the three switch levels.
#[derive(Debug, Clone)]
pub struct SwitchLevels {
    pub edges: Vec<u32>,
    pub aggregates: Vec<u32>,
    pub cores: Vec<u32>,
}

/// All device ids split by level; sizes are k^3/4, k^2/2, k^2/2, k^2/4.
#[derive(Debug, Clone)]
pub struct LevelPartition {
    pub servers: Vec<u32>,
    pub edges: Vec<u32>,
    pub aggregates: Vec<u32>,
    pub cores: Vec<u32>,
}

/// Node-id groups of size k/2 with 1-based group ids in formation order.
#[derive(Debug, Clone)]
pub struct SimilarityGroups {
    groups: Vec<Vec<u32>>,
}

impl SimilarityGroups {
    pub fn groups(&self) -> &[Vec<u32>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Full detection output: the recovered assignment, its minimal repair
/// plan, and a flag raised when the plan is long enough that the input was
/// outside the k/2 exactness bound.
#[derive(Debug, Clone)]
pub struct Algo1Result {
    pub assignment: RoleAssignment,
    pub plan: FixationPlan,
    pub beyond_bound: bool,
}

/// Orders node ids by (degree, id) using a counting sort over degrees.
fn order_by_degree(g: &DeviceGraph) -> Vec<u32> {
    let mut buckets: Vec<Vec<u32>> = Vec::new();
    for v in 0..g.n() as u32 {
        let d = g.neighbors(v).len();
        if buckets.len() <= d {
            buckets.resize(d + 1, Vec::new());
        }
        buckets[d].push(v);
    }
    buckets.into_iter().flatten().collect()
}

/// Removes the k^3/4 least-degree nodes (the servers), ties by smallest
/// node id, and returns the induced switch graph.
pub fn strip_servers(g: &DeviceGraph, params: FatTreeParams) -> Result<StripResult> {
    if g.n() != params.node_count() {
        return Err(Error::InputShape(format!(
            "{} nodes, expected {} for FatTree({})",
            g.n(),
            params.node_count(),
            params.k()
        )));
    }
    let order = order_by_degree(g);
    let mut servers: Vec<u32> = order[..params.server_count()].to_vec();
    servers.sort_unstable();
    let mut switches: Vec<u32> = order[params.server_count()..].to_vec();
    switches.sort_unstable();
    let (switch_graph, switch_to_device) = g.induced_subgraph(&switches);
    Ok(StripResult {
        switch_graph,
        servers,
        switch_to_device,
    })
}

/// Splits the switch graph into levels: the k^2/2 least-degree nodes are
/// edge switches; of the rest, the k^2/2 with the most edge neighbors are
/// aggregates and the remaining k^2/4 are cores. Ties by smallest id.
pub fn classify_levels(sw: &DeviceGraph, params: FatTreeParams) -> Result<SwitchLevels> {
    if sw.n() != params.switch_count() {
        return Err(Error::InputShape(format!(
            "switch graph has {} nodes, expected {}",
            sw.n(),
            params.switch_count()
        )));
    }
    let order = order_by_degree(sw);
    let mut edges: Vec<u32> = order[..params.edge_switch_count()].to_vec();
    edges.sort_unstable();

    let mut is_edge = vec![false; sw.n()];
    for &e in &edges {
        is_edge[e as usize] = true;
    }
    let mut rest: Vec<(usize, u32)> = order[params.edge_switch_count()..]
        .iter()
        .map(|&v| {
            let count = sw
                .neighbors(v)
                .iter()
                .filter(|&&w| is_edge[w as usize])
                .count();
            (count, v)
        })
        .collect();
    rest.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut aggregates: Vec<u32> = rest[..params.aggregate_count()]
        .iter()
        .map(|&(_, v)| v)
        .collect();
    aggregates.sort_unstable();
    let mut cores: Vec<u32> = rest[params.aggregate_count()..]
        .iter()
        .map(|&(_, v)| v)
        .collect();
    cores.sort_unstable();

    Ok(SwitchLevels {
        edges,
        aggregates,
        cores,
    })
}

/// Strip and classify composed, reported in original device ids.
pub fn partition_levels(g: &DeviceGraph, params: FatTreeParams) -> Result<LevelPartition> {
    let strip = strip_servers(g, params)?;
    let levels = classify_levels(&strip.switch_graph, params)?;
    let remap = |ids: &[u32]| ids.iter().map(|&v| strip.switch_to_device[v as usize]).collect();
    Ok(LevelPartition {
        servers: strip.servers.clone(),
        edges: remap(&levels.edges),
        aggregates: remap(&levels.aggregates),
        cores: remap(&levels.cores),
    })
}

fn group_with_bits(
    bits: &BitRows,
    nodes: &[u32],
    half: usize,
) -> Result<SimilarityGroups> {
    if half == 0 || nodes.len() % half != 0 {
        return Err(Error::InputShape(format!(
            "{} nodes cannot split into groups of {half}",
            nodes.len()
        )));
    }
    let mut remaining: Vec<u32> = nodes.to_vec();
    remaining.sort_unstable();
    let mut groups = Vec::with_capacity(nodes.len() / half);
    while !remaining.is_empty() {
        let anchor = remaining[0];
        let mut scored: Vec<(usize, u32)> = remaining[1..]
            .iter()
            .map(|&v| (bits.and_count(anchor, v), v))
            .collect();
        scored.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut group: Vec<u32> = std::iter::once(anchor)
            .chain(scored[..half - 1].iter().map(|&(_, v)| v))
            .collect();
        group.sort_unstable();
        remaining.retain(|v| !group.contains(v));
        groups.push(group);
    }
    Ok(SimilarityGroups { groups })
}

/// Partitions `nodes` into groups of k/2 by neighborhood similarity: the
/// lowest-id ungrouped node anchors each group and pulls in its k/2 - 1
/// most similar ungrouped peers (ties by smallest id). Group ids follow
/// formation order.
pub fn group_by_similarity(
    sw: &DeviceGraph,
    nodes: &[u32],
    params: FatTreeParams,
) -> Result<SimilarityGroups> {
    group_with_bits(&BitRows::from_graph(sw), nodes, params.half() as usize)
}

/// Greedily fills every aggregate role (pod, index) in lexical order with
/// the unassigned aggregate-level node sharing the most neighbors with the
/// role's expected neighborhood (edge group `pod` plus core group
/// `index`), then assembles the full assignment: edge indexes by ascending
/// id within each pod, servers following their unique edge neighbor, and
/// leftover servers filling unfilled slots in id order.
pub fn assign_aggregates(
    original: &DeviceGraph,
    strip: &StripResult,
    levels: &SwitchLevels,
    edge_groups: &SimilarityGroups,
    core_groups: &SimilarityGroups,
    params: FatTreeParams,
) -> Result<RoleAssignment> {
    let bits = BitRows::from_graph(&strip.switch_graph);
    assign_with_bits(original, strip, levels, edge_groups, core_groups, &bits, params)
}

fn assign_with_bits(
    original: &DeviceGraph,
    strip: &StripResult,
    levels: &SwitchLevels,
    edge_groups: &SimilarityGroups,
    core_groups: &SimilarityGroups,
    bits: &BitRows,
    params: FatTreeParams,
) -> Result<RoleAssignment> {
    let k = params.k() as usize;
    let half = params.half() as usize;
    if edge_groups.len() != k || core_groups.len() != half {
        return Err(Error::InputShape(format!(
            "need {k} edge groups and {half} core groups, got {} and {}",
            edge_groups.len(),
            core_groups.len()
        )));
    }

    let group_mask = |group: &[u32]| {
        let mut mask = bits.empty_mask();
        for &v in group {
            BitRows::set_in_mask(&mut mask, v);
        }
        mask
    };
    let edge_masks: Vec<Vec<u64>> = edge_groups.groups().iter().map(|g| group_mask(g)).collect();
    let core_masks: Vec<Vec<u64>> = core_groups.groups().iter().map(|g| group_mask(g)).collect();

    // greedy aggregate placement, roles in (pod, index) lexical order
    let mut used = vec![false; strip.switch_graph.n()];
    let mut placements = Vec::with_capacity(k * half);
    for pod in 0..k {
        for index in 0..half {
            let mut expected = edge_masks[pod].clone();
            for (word, core) in expected.iter_mut().zip(&core_masks[index]) {
                *word |= core;
            }
            let mut best: Option<(usize, u32)> = None;
            for &cand in &levels.aggregates {
                if used[cand as usize] {
                    continue;
                }
                let score = bits.mask_count(cand, &expected);
                let better = match best {
                    None => true,
                    Some((bs, _)) => score > bs,
                };
                if better {
                    best = Some((score, cand));
                }
            }
            let (_, choice) = best.ok_or_else(|| {
                Error::InputShape("fewer aggregate nodes than aggregate roles".into())
            })?;
            used[choice as usize] = true;
            placements.push(AggPlacement {
                node: choice,
                pod: (pod + 1) as u32,
                index: (index + 1) as u32,
            });
        }
    }

    assemble_assignment(
        original,
        strip,
        edge_groups.groups(),
        core_groups.groups(),
        &placements,
        params,
    )
}

/// A switch-graph node placed into one aggregate role.
pub(crate) struct AggPlacement {
    pub node: u32,
    pub pod: u32,
    pub index: u32,
}

/// Builds the full assignment from per-level groupings: edge indexes by
/// ascending id within each pod, core groups as given, aggregates from
/// their placements, and servers following their unique edge neighbor with
/// leftovers filling unfilled slots in id order.
pub(crate) fn assemble_assignment(
    original: &DeviceGraph,
    strip: &StripResult,
    edge_groups: &[Vec<u32>],
    core_groups: &[Vec<u32>],
    placements: &[AggPlacement],
    params: FatTreeParams,
) -> Result<RoleAssignment> {
    let k = params.k() as usize;
    let half = params.half() as usize;
    let mut roles: Vec<Option<Role>> = vec![None; original.n()];
    let dev = |v: u32| strip.switch_to_device[v as usize];

    for (gi, group) in core_groups.iter().enumerate() {
        for &v in group {
            roles[dev(v) as usize] = Some(Role::Core {
                group: (gi + 1) as u32,
            });
        }
    }
    // edge switch -> global edge index, for server grouping
    let mut edge_group_of_device: Vec<Option<u32>> = vec![None; original.n()];
    for (pi, group) in edge_groups.iter().enumerate() {
        for (j, &v) in group.iter().enumerate() {
            roles[dev(v) as usize] = Some(Role::Edge {
                group: (pi + 1) as u32,
                index: (j + 1) as u32,
            });
            edge_group_of_device[dev(v) as usize] = Some((pi * half + j + 1) as u32);
        }
    }
    for p in placements {
        roles[dev(p.node) as usize] = Some(Role::Aggregate {
            group: p.pod,
            index: p.index,
        });
    }

    // servers follow their unique edge neighbor while its group has room
    let group_count = k * half;
    let mut fill = vec![0usize; group_count];
    let mut leftovers = Vec::new();
    for &s in &strip.servers {
        let mut edge_neighbors = original
            .neighbors(s)
            .iter()
            .filter_map(|&w| edge_group_of_device[w as usize]);
        match (edge_neighbors.next(), edge_neighbors.next()) {
            (Some(g), None) if fill[(g - 1) as usize] < half => {
                fill[(g - 1) as usize] += 1;
                roles[s as usize] = Some(Role::Server { group: g });
            }
            _ => leftovers.push(s),
        }
    }
    let mut next_group = 0usize;
    for s in leftovers {
        while next_group < group_count && fill[next_group] >= half {
            next_group += 1;
        }
        if next_group >= group_count {
            return Err(Error::InvalidAssignment(
                "more servers than server slots".into(),
            ));
        }
        fill[next_group] += 1;
        roles[s as usize] = Some(Role::Server {
            group: (next_group + 1) as u32,
        });
    }

    let roles: Vec<Role> = roles
        .into_iter()
        .enumerate()
        .map(|(v, r)| {
            r.ok_or_else(|| Error::InvalidAssignment(format!("node {v} received no role")))
        })
        .collect::<Result<_>>()?;
    Ok(RoleAssignment::new(roles))
}

/// The whole pipeline: strip, classify, group, assign, and compute the
/// fixation plan. Within the k/2 malfunction bound the plan is minimal;
/// beyond it the plan is still feasible and `beyond_bound` is raised.
pub fn run_algo1(g: &DeviceGraph, params: FatTreeParams) -> Result<Algo1Result> {
    let strip = strip_servers(g, params)?;
    let levels = classify_levels(&strip.switch_graph, params)?;
    let bits = BitRows::from_graph(&strip.switch_graph);
    let half = params.half() as usize;
    let edge_groups = group_with_bits(&bits, &levels.edges, half)?;
    let core_groups = group_with_bits(&bits, &levels.cores, half)?;
    let assignment = assign_with_bits(
        g,
        &strip,
        &levels,
        &edge_groups,
        &core_groups,
        &bits,
        params,
    )?;
    debug_assert!(assignment.validate(params).is_ok());
    let plan = fixation::compute_fixation(g, &assignment, params)?;
    let beyond_bound = plan.steps() >= params.half() as usize;
    Ok(Algo1Result {
        assignment,
        plan,
        beyond_bound,
    })
}
