//! Repair plans and address auto-configuration.
//!
//! A fixation plan is the exact symmetric difference between the physical
//! graph and the adjacency its role assignment implies: disconnect every
//! link that should not exist, connect every link that should. The number
//! of link steps therefore equals half the matrix Hamming distance.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::blueprint::{self, FatTreeParams, RoleAssignment};
use crate::error::{Error, Result};
use crate::graph::DeviceGraph;

/// One repair action. Link actions name node ids; `ServerFault` is an
/// advisory entry for an edge switch whose server count disagrees with the
/// blueprint (the physical follow-up is out of band).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixAction {
    Disconnect(u32, u32),
    Connect(u32, u32),
    ServerFault {
        edge_switch: u32,
        expected: u32,
        actual: u32,
    },
}

/// Ordered repair plan: disconnects first, then connects, then advisory
/// server-fault entries. `steps` counts link actions only.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FixationPlan {
    actions: Vec<FixAction>,
    steps: usize,
}

impl FixationPlan {
    pub fn actions(&self) -> &[FixAction] {
        &self.actions
    }

    /// Number of disconnect/connect steps; equals half the Hamming
    /// distance between the physical and expected adjacency matrices.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    pub(crate) fn push_server_fault(&mut self, edge_switch: u32, expected: u32, actual: u32) {
        self.actions.push(FixAction::ServerFault {
            edge_switch,
            expected,
            actual,
        });
    }

    /// JSON-lines rendering, one action per line, device labels taken from
    /// `graph`. Stable-sorted for diffability.
    pub fn to_jsonl(&self, graph: &DeviceGraph) -> String {
        #[derive(Serialize)]
        struct LinkLine<'a> {
            op: &'a str,
            u: &'a str,
            v: &'a str,
        }
        #[derive(Serialize)]
        struct FaultLine<'a> {
            op: &'a str,
            edge: &'a str,
            expected: u32,
            actual: u32,
        }
        let mut out = String::new();
        for action in &self.actions {
            let line = match *action {
                FixAction::Disconnect(u, v) => serde_json::to_string(&LinkLine {
                    op: "disconnect",
                    u: graph.device_id(u),
                    v: graph.device_id(v),
                }),
                FixAction::Connect(u, v) => serde_json::to_string(&LinkLine {
                    op: "connect",
                    u: graph.device_id(u),
                    v: graph.device_id(v),
                }),
                FixAction::ServerFault {
                    edge_switch,
                    expected,
                    actual,
                } => serde_json::to_string(&FaultLine {
                    op: "server_fault",
                    edge: graph.device_id(edge_switch),
                    expected,
                    actual,
                }),
            };
            out.push_str(&line.expect("plan line serializes"));
            out.push('\n');
        }
        out
    }
}

/// Plan transforming `physical` into `expected`: the per-row sorted
/// symmetric difference, disconnects before connects, each sorted by
/// (u,v).
pub fn diff_graphs(physical: &DeviceGraph, expected: &DeviceGraph) -> Result<FixationPlan> {
    if physical.n() != expected.n() {
        return Err(Error::SizeMismatch {
            left: physical.n(),
            right: expected.n(),
        });
    }
    let mut disconnects = Vec::new();
    let mut connects = Vec::new();
    for u in 0..physical.n() as u32 {
        let mut phys = physical.neighbors(u).iter().copied().peekable();
        let mut exp = expected.neighbors(u).iter().copied().peekable();
        loop {
            match (phys.peek().copied(), exp.peek().copied()) {
                (Some(p), Some(e)) if p == e => {
                    phys.next();
                    exp.next();
                }
                (Some(p), Some(e)) if p < e => {
                    if u < p {
                        disconnects.push(FixAction::Disconnect(u, p));
                    }
                    phys.next();
                }
                (Some(_), Some(e)) => {
                    if u < e {
                        connects.push(FixAction::Connect(u, e));
                    }
                    exp.next();
                }
                (Some(p), None) => {
                    if u < p {
                        disconnects.push(FixAction::Disconnect(u, p));
                    }
                    phys.next();
                }
                (None, Some(e)) => {
                    if u < e {
                        connects.push(FixAction::Connect(u, e));
                    }
                    exp.next();
                }
                (None, None) => break,
            }
        }
    }
    let steps = disconnects.len() + connects.len();
    let mut actions = disconnects;
    actions.extend(connects);
    Ok(FixationPlan { actions, steps })
}

/// Minimal repair plan for `physical` under `assignment`: the difference
/// between the physical adjacency and the unique adjacency the assignment
/// implies.
pub fn compute_fixation(
    physical: &DeviceGraph,
    assignment: &RoleAssignment,
    params: FatTreeParams,
) -> Result<FixationPlan> {
    if physical.n() != assignment.len() {
        return Err(Error::SizeMismatch {
            left: physical.n(),
            right: assignment.len(),
        });
    }
    let expected = blueprint::expected_adjacency(assignment, params)?;
    diff_graphs(physical, &expected)
}

/// Applies a plan, validating each link action against the current state.
pub fn apply_fixation(g: &DeviceGraph, plan: &FixationPlan) -> Result<DeviceGraph> {
    let mut out = g.clone();
    for action in plan.actions() {
        match *action {
            FixAction::Disconnect(u, v) => {
                if !out.has_edge(u, v) {
                    return Err(Error::PlanStale(format!(
                        "disconnect ({u},{v}) targets a missing link"
                    )));
                }
                out.remove_edge(u, v)?;
            }
            FixAction::Connect(u, v) => {
                if out.has_edge(u, v) {
                    return Err(Error::PlanStale(format!(
                        "connect ({u},{v}) targets an existing link"
                    )));
                }
                out.add_edge(u, v)?;
            }
            FixAction::ServerFault { .. } => {}
        }
    }
    Ok(out)
}

/// Device-to-logical-address table: one address per node id, injective
/// over the whole network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressTable {
    addresses: Vec<String>,
}

impl AddressTable {
    pub fn address(&self, v: u32) -> &str {
        &self.addresses[v as usize]
    }

    pub fn addresses(&self) -> &[String] {
        &self.addresses
    }

    pub fn len(&self) -> usize {
        self.addresses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addresses.is_empty()
    }

    /// JSON map from device label to address, keys sorted.
    pub fn to_json(&self, graph: &DeviceGraph) -> Result<String> {
        if graph.n() != self.addresses.len() {
            return Err(Error::SizeMismatch {
                left: graph.n(),
                right: self.addresses.len(),
            });
        }
        let map: BTreeMap<&str, &str> = (0..graph.n())
            .map(|v| (graph.device_id(v as u32), self.addresses[v].as_str()))
            .collect();
        let mut s = serde_json::to_string_pretty(&map)?;
        s.push('\n');
        Ok(s)
    }
}

/// Derives every device's logical address from its role, numbering nodes
/// within an orbit by ascending node id.
pub fn autoconfigure(assignment: &RoleAssignment, params: FatTreeParams) -> Result<AddressTable> {
    assignment.validate(params)?;
    let slots = assignment.slots();
    let addresses: Vec<String> = assignment
        .roles()
        .iter()
        .zip(&slots)
        .map(|(&role, &slot)| blueprint::logical_id(role, slot, params))
        .collect();
    debug_assert_eq!(
        addresses.iter().collect::<std::collections::HashSet<_>>().len(),
        addresses.len()
    );
    Ok(AddressTable { addresses })
}

/// True iff the graph is a valid FatTree(k): detection finds nothing to
/// fix.
pub fn verify_repaired(g: &DeviceGraph, params: FatTreeParams) -> bool {
    crate::algo1::run_algo1(g, params)
        .map(|r| r.plan.is_empty())
        .unwrap_or(false)
}
