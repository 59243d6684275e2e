//! The re-designed FatTree blueprint: roles, connection rules, canonical
//! generation, and the logical addresses a role implies.
//!
//! A FatTree(k) has k^3/4 servers and 5k^2/4 switches in four layers. Every
//! node carries a [`Role`]; two nodes with the same role are structurally
//! interchangeable, and a full role assignment determines the adjacency
//! matrix of the network uniquely.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DeviceGraph;

/// Validated FatTree size parameter: the switch port count `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FatTreeParams {
    k: u32,
}

impl FatTreeParams {
    pub fn new(k: u32) -> Result<Self> {
        if k < 4 || k % 2 != 0 {
            return Err(Error::InvalidParam(format!(
                "k must be even and at least 4, got {k}"
            )));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// k/2: group size for cores, pod width, hosts per edge switch.
    pub fn half(&self) -> u32 {
        self.k / 2
    }

    pub fn server_count(&self) -> usize {
        let k = self.k as usize;
        k * k * k / 4
    }

    pub fn edge_switch_count(&self) -> usize {
        let k = self.k as usize;
        k * k / 2
    }

    pub fn aggregate_count(&self) -> usize {
        let k = self.k as usize;
        k * k / 2
    }

    pub fn core_count(&self) -> usize {
        let k = self.k as usize;
        k * k / 4
    }

    pub fn switch_count(&self) -> usize {
        let k = self.k as usize;
        5 * k * k / 4
    }

    pub fn node_count(&self) -> usize {
        self.server_count() + self.switch_count()
    }

    pub fn link_count(&self) -> usize {
        let k = self.k as usize;
        3 * k * k * k / 4
    }

    /// True iff the connection rules join roles `a` and `b`. Symmetric;
    /// only server/edge, edge/aggregate, and aggregate/core pairs can
    /// connect.
    pub fn connected(&self, a: Role, b: Role) -> bool {
        use Role::*;
        let half = self.half();
        match (a, b) {
            (Core { group }, Aggregate { index, .. })
            | (Aggregate { index, .. }, Core { group }) => group == index,
            (Aggregate { group: ag, .. }, Edge { group: eg, .. })
            | (Edge { group: eg, .. }, Aggregate { group: ag, .. }) => ag == eg,
            (Edge { group, index }, Server { group: sg })
            | (Server { group: sg }, Edge { group, index }) => {
                sg == (group - 1) * half + index
            }
            _ => false,
        }
    }
}

/// Recovers k from a device count of the form k^3/4 + 5k^2/4.
pub fn infer_k(n: usize) -> Result<FatTreeParams> {
    let mut k = 4u32;
    loop {
        let params = FatTreeParams { k };
        match params.node_count().cmp(&n) {
            std::cmp::Ordering::Equal => return Ok(params),
            std::cmp::Ordering::Greater => {
                return Err(Error::InputShape(format!(
                    "{n} nodes matches no FatTree size"
                )))
            }
            std::cmp::Ordering::Less => k += 2,
        }
    }
}

/// Structural identity of a device. Groups and indexes are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Core switch; group in 1..=k/2, with k/2 switches per group.
    Core { group: u32 },
    /// Aggregation switch; group is its pod in 1..=k, index in 1..=k/2 is
    /// the core group it connects to.
    Aggregate { group: u32, index: u32 },
    /// Edge switch; group is its pod in 1..=k, index in 1..=k/2.
    Edge { group: u32, index: u32 },
    /// Server; group in 1..=k^2/2 names the global index of its edge
    /// switch, with k/2 servers per group.
    Server { group: u32 },
}

impl Role {
    pub fn kind(&self) -> &'static str {
        match self {
            Role::Core { .. } => "core",
            Role::Aggregate { .. } => "aggregate",
            Role::Edge { .. } => "edge",
            Role::Server { .. } => "server",
        }
    }

    pub fn group(&self) -> u32 {
        match *self {
            Role::Core { group }
            | Role::Aggregate { group, .. }
            | Role::Edge { group, .. }
            | Role::Server { group } => group,
        }
    }

    pub fn index(&self) -> Option<u32> {
        match *self {
            Role::Aggregate { index, .. } | Role::Edge { index, .. } => Some(index),
            _ => None,
        }
    }

    /// How many devices carry this exact role in a canonical FatTree.
    pub fn multiplicity(&self, params: FatTreeParams) -> u32 {
        match self {
            Role::Core { .. } | Role::Server { .. } => params.half(),
            Role::Aggregate { .. } | Role::Edge { .. } => 1,
        }
    }
}

/// Total device-to-role mapping, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleAssignment {
    roles: Vec<Role>,
}

impl RoleAssignment {
    pub fn new(roles: Vec<Role>) -> Self {
        Self { roles }
    }

    pub fn role(&self, v: u32) -> Role {
        self.roles[v as usize]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    /// Checks that the role multiset is exactly the canonical one: each
    /// switch role with its multiplicity and each server group with k/2
    /// members.
    pub fn validate(&self, params: FatTreeParams) -> Result<()> {
        if self.roles.len() != params.node_count() {
            return Err(Error::InvalidAssignment(format!(
                "{} roles for a FatTree({}) needing {}",
                self.roles.len(),
                params.k(),
                params.node_count()
            )));
        }
        let half = params.half();
        let k = params.k();
        let mut core = vec![0u32; half as usize];
        let mut agg = vec![0u32; (k * half) as usize];
        let mut edge = vec![0u32; (k * half) as usize];
        let mut server = vec![0u32; (k * k / 2) as usize];
        for (v, role) in self.roles.iter().enumerate() {
            let bad = |what: &str| {
                Error::InvalidAssignment(format!("node {v}: {what} out of range: {role:?}"))
            };
            match *role {
                Role::Core { group } => {
                    if group == 0 || group > half {
                        return Err(bad("core group"));
                    }
                    core[(group - 1) as usize] += 1;
                }
                Role::Aggregate { group, index } => {
                    if group == 0 || group > k || index == 0 || index > half {
                        return Err(bad("aggregate group/index"));
                    }
                    agg[((group - 1) * half + index - 1) as usize] += 1;
                }
                Role::Edge { group, index } => {
                    if group == 0 || group > k || index == 0 || index > half {
                        return Err(bad("edge group/index"));
                    }
                    edge[((group - 1) * half + index - 1) as usize] += 1;
                }
                Role::Server { group } => {
                    if group == 0 || group > k * k / 2 {
                        return Err(bad("server group"));
                    }
                    server[(group - 1) as usize] += 1;
                }
            }
        }
        if core.iter().any(|&c| c != half) {
            return Err(Error::InvalidAssignment(
                "core groups must hold exactly k/2 switches each".into(),
            ));
        }
        if agg.iter().any(|&c| c != 1) || edge.iter().any(|&c| c != 1) {
            return Err(Error::InvalidAssignment(
                "every aggregate/edge (group,index) pair must appear exactly once".into(),
            ));
        }
        if server.iter().any(|&c| c != half) {
            return Err(Error::InvalidAssignment(
                "server groups must hold exactly k/2 servers each".into(),
            ));
        }
        Ok(())
    }

    /// Slot of each node within its role orbit, 1-based, ordered by node
    /// id. Nodes with multiplicity-1 roles always get slot 1.
    pub fn slots(&self) -> Vec<u32> {
        let mut seen: HashMap<Role, u32> = HashMap::new();
        self.roles
            .iter()
            .map(|role| {
                let c = seen.entry(*role).or_insert(0);
                *c += 1;
                *c
            })
            .collect()
    }
}

/// The canonical role multiset, in canonical node order: servers, then
/// edge switches, then aggregates, then cores.
pub fn canonical_roles(params: FatTreeParams) -> Vec<Role> {
    let half = params.half();
    let mut roles = Vec::with_capacity(params.node_count());
    for i in 1..=params.server_count() as u32 {
        roles.push(Role::Server {
            group: (i + half - 1) / half,
        });
    }
    for i in 1..=params.edge_switch_count() as u32 {
        roles.push(Role::Edge {
            group: (i + half - 1) / half,
            index: (i - 1) % half + 1,
        });
    }
    for i in 1..=params.aggregate_count() as u32 {
        roles.push(Role::Aggregate {
            group: (i + half - 1) / half,
            index: (i - 1) % half + 1,
        });
    }
    for j in 1..=params.core_count() as u32 {
        roles.push(Role::Core {
            group: (j + half - 1) / half,
        });
    }
    roles
}

/// Writes the ascending merge of two disjoint sorted lists into `dst`.
fn merge_sorted(dst: &mut [u32], a: &[u32], b: &[u32]) {
    debug_assert_eq!(dst.len(), a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    for slot in dst.iter_mut() {
        let take_a = j >= b.len() || (i < a.len() && a[i] < b[j]);
        if take_a {
            *slot = a[i];
            i += 1;
        } else {
            *slot = b[j];
            j += 1;
        }
    }
}

/// Sorted adjacency rows in raw CSR form, without the label table.
pub(crate) struct ExpectedRows {
    pub offsets: Vec<u32>,
    pub flat: Vec<u32>,
}

impl ExpectedRows {
    pub fn row(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.flat[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }
}

/// The unique adjacency a valid role assignment implies: edge (u,v) iff
/// `connected(role(u), role(v))`. Rows come out sorted by merging
/// per-level node lists, so construction is linear in the link count.
pub fn expected_adjacency(
    assignment: &RoleAssignment,
    params: FatTreeParams,
) -> Result<DeviceGraph> {
    let rows = expected_rows(assignment, params)?;
    let ids = (0..assignment.len()).map(|i| i.to_string()).collect();
    Ok(DeviceGraph::from_csr(rows.offsets, rows.flat, ids))
}

/// Label-free variant of [`expected_adjacency`] for the detection hot
/// path.
pub(crate) fn expected_rows(
    assignment: &RoleAssignment,
    params: FatTreeParams,
) -> Result<ExpectedRows> {
    assignment.validate(params)?;
    let half = params.half() as usize;
    let k = params.k() as usize;
    let n = assignment.len();

    // per-level node lists; scanning ids in order keeps each list sorted
    let mut cores_by_group: Vec<Vec<u32>> = vec![Vec::with_capacity(half); half];
    let mut aggs_by_pod: Vec<Vec<u32>> = vec![Vec::with_capacity(half); k];
    let mut aggs_by_index: Vec<Vec<u32>> = vec![Vec::with_capacity(k); half];
    let mut edges_by_pod: Vec<Vec<u32>> = vec![Vec::with_capacity(half); k];
    let mut servers_by_group: Vec<Vec<u32>> = vec![Vec::with_capacity(half); k * half];
    let mut edge_of_group: Vec<u32> = vec![0; k * half];
    for (v, role) in assignment.roles().iter().enumerate() {
        let v = v as u32;
        match *role {
            Role::Core { group } => cores_by_group[(group - 1) as usize].push(v),
            Role::Aggregate { group, index } => {
                aggs_by_pod[(group - 1) as usize].push(v);
                aggs_by_index[(index - 1) as usize].push(v);
            }
            Role::Edge { group, index } => {
                edges_by_pod[(group - 1) as usize].push(v);
                edge_of_group[((group - 1) * params.half() + index - 1) as usize] = v;
            }
            Role::Server { group } => servers_by_group[(group - 1) as usize].push(v),
        }
    }

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0u32);
    for role in assignment.roles() {
        let degree = match *role {
            Role::Core { group } => aggs_by_index[(group - 1) as usize].len(),
            Role::Aggregate { group, index } => {
                edges_by_pod[(group - 1) as usize].len()
                    + cores_by_group[(index - 1) as usize].len()
            }
            Role::Edge { group, index } => {
                let g = ((group - 1) * params.half() + index - 1) as usize;
                servers_by_group[g].len() + aggs_by_pod[(group - 1) as usize].len()
            }
            Role::Server { .. } => 1,
        };
        offsets.push(offsets.last().unwrap() + degree as u32);
    }
    let mut flat = vec![0u32; *offsets.last().unwrap() as usize];
    for (v, role) in assignment.roles().iter().enumerate() {
        let row = &mut flat[offsets[v] as usize..offsets[v + 1] as usize];
        match *role {
            Role::Core { group } => {
                row.copy_from_slice(&aggs_by_index[(group - 1) as usize]);
            }
            Role::Aggregate { group, index } => merge_sorted(
                row,
                &edges_by_pod[(group - 1) as usize],
                &cores_by_group[(index - 1) as usize],
            ),
            Role::Edge { group, index } => {
                let g = ((group - 1) * params.half() + index - 1) as usize;
                merge_sorted(row, &servers_by_group[g], &aggs_by_pod[(group - 1) as usize]);
            }
            Role::Server { group } => {
                row[0] = edge_of_group[(group - 1) as usize];
            }
        }
    }
    Ok(ExpectedRows { offsets, flat })
}

/// Generates the canonical blueprint: the structural measure applied
/// verbatim over canonical node ids (servers 0.., edges, aggregates,
/// cores last).
pub fn generate_blueprint(params: FatTreeParams) -> (DeviceGraph, RoleAssignment) {
    let half = params.half() as usize;
    let k = params.k() as usize;
    let s = params.server_count();
    let e = params.edge_switch_count();
    let a = params.aggregate_count();

    let server_base = 0usize;
    let edge_base = s;
    let agg_base = s + e;
    let core_base = s + e + a;

    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(params.node_count());
    // servers: v_i connects to w_j with j = ceil(i / (k/2))
    for i in 1..=s {
        let j = i.div_ceil(half);
        rows.push(vec![(edge_base + j - 1) as u32]);
    }
    // edge switches: servers of group i, then the pod's aggregates
    for i in 1..=e {
        let pod = i.div_ceil(half);
        let mut row = Vec::with_capacity(2 * half);
        for srv in (i - 1) * half..i * half {
            row.push((server_base + srv) as u32);
        }
        for x in (pod - 1) * half..pod * half {
            row.push((agg_base + x) as u32);
        }
        rows.push(row);
    }
    // aggregates: pod edges, then the cores of the matching group
    for i in 1..=a {
        let pod = i.div_ceil(half);
        let index = (i - 1) % half + 1;
        let mut row = Vec::with_capacity(2 * half);
        for w in (pod - 1) * half..pod * half {
            row.push((edge_base + w) as u32);
        }
        for c in (index - 1) * half..index * half {
            row.push((core_base + c) as u32);
        }
        rows.push(row);
    }
    // cores: one aggregate per pod, the one whose index equals the group
    for j in 1..=params.core_count() {
        let group = j.div_ceil(half);
        let mut row = Vec::with_capacity(k);
        for pod in 0..k {
            row.push((agg_base + pod * half + group - 1) as u32);
        }
        rows.push(row);
    }

    let graph = DeviceGraph::from_rows(rows, None);
    let assignment = RoleAssignment::new(canonical_roles(params));
    (graph, assignment)
}

/// Deterministic dotted logical address for a role occurrence. `slot` is
/// the 1-based position within the role's orbit (1 for aggregate/edge
/// roles, 1..=k/2 for core and server roles). Injective over the canonical
/// role multiset.
///
/// Servers live at 10.pod.edgeindex.(1+slot), pod switches at
/// 10.pod.pos.1 with edge positions 1..=k/2 below aggregate positions, and
/// cores above the pods at 10.(k+1).group.slot.
pub fn logical_id(role: Role, slot: u32, params: FatTreeParams) -> String {
    let half = params.half();
    match role {
        Role::Server { group } => {
            let pod = (group + half - 1) / half;
            let edge_index = (group - 1) % half + 1;
            format!("10.{pod}.{edge_index}.{}", 1 + slot)
        }
        Role::Edge { group, index } => format!("10.{group}.{index}.1"),
        Role::Aggregate { group, index } => format!("10.{group}.{}.1", half + index),
        Role::Core { group } => format!("10.{}.{group}.{slot}", params.k() + 1),
    }
}

/// One row of the role table export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoleRecord {
    pub device_id: String,
    pub role_kind: String,
    pub group: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<u32>,
    pub logical_id: String,
}

/// Role table for export: one record per device, in node-id order.
pub fn role_table(
    graph: &DeviceGraph,
    assignment: &RoleAssignment,
    params: FatTreeParams,
) -> Result<Vec<RoleRecord>> {
    if graph.n() != assignment.len() {
        return Err(Error::SizeMismatch {
            left: graph.n(),
            right: assignment.len(),
        });
    }
    let slots = assignment.slots();
    Ok((0..graph.n())
        .map(|v| {
            let role = assignment.role(v as u32);
            RoleRecord {
                device_id: graph.device_id(v as u32).to_string(),
                role_kind: role.kind().to_string(),
                group: role.group(),
                index: role.index(),
                logical_id: logical_id(role, slots[v], params),
            }
        })
        .collect())
}
