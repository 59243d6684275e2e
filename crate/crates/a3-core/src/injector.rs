//! Seeded generation of physical graphs with a known ground-truth set of
//! undirected link malfunctions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blueprint;
use crate::error::{Error, Result};
use crate::graph::DeviceGraph;

/// Which links are eligible for injected edits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// Only switch-to-switch links; server rows stay untouched, so every
    /// server keeps degree exactly 1.
    #[default]
    SwitchLinksOnly,
    /// Server links may be removed and additions may touch servers.
    IncludeServerLinks,
}

/// A seeded injection request. The malfunction count is
/// `x = removals + additions + 4*swaps`: each degree-preserving swap
/// contributes two removed and two added links.
#[derive(Debug, Clone)]
pub struct MalfunctionSpec {
    pub seed: u64,
    pub removals: usize,
    pub additions: usize,
    pub swaps: usize,
    pub scope: Scope,
}

impl MalfunctionSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            removals: 0,
            additions: 0,
            swaps: 0,
            scope: Scope::default(),
        }
    }

    pub fn removals(mut self, n: usize) -> Self {
        self.removals = n;
        self
    }

    pub fn additions(mut self, n: usize) -> Self {
        self.additions = n;
        self
    }

    pub fn swaps(mut self, n: usize) -> Self {
        self.swaps = n;
        self
    }

    pub fn scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    /// Total undirected link malfunctions this spec injects.
    pub fn x(&self) -> usize {
        self.removals + self.additions + 4 * self.swaps
    }

    /// Splits a malfunction count into the default 50/50 removal/addition
    /// mix, remainder to removals.
    pub fn mixed(seed: u64, x: usize) -> Self {
        Self::new(seed).removals(x - x / 2).additions(x / 2)
    }
}

/// The injected edits: removed links were present in the original graph,
/// added links were not, and the two sets are disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthDiff {
    pub removed: Vec<(u32, u32)>,
    pub added: Vec<(u32, u32)>,
}

impl GroundTruthDiff {
    /// Number of undirected link malfunctions recorded.
    pub fn x(&self) -> usize {
        self.removed.len() + self.added.len()
    }
}

fn norm(u: u32, v: u32) -> (u32, u32) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Nodes eligible as edit endpoints under `scope`, given the blueprint's
/// degree-1 servers.
fn scope_nodes(g: &DeviceGraph, scope: Scope) -> Vec<u32> {
    match scope {
        Scope::SwitchLinksOnly => (0..g.n() as u32)
            .filter(|&v| g.neighbors(v).len() != 1)
            .collect(),
        Scope::IncludeServerLinks => (0..g.n() as u32).collect(),
    }
}

fn check_blueprint(g: &DeviceGraph) -> Result<()> {
    let params = blueprint::infer_k(g.n())
        .map_err(|_| Error::Injection(format!("{} nodes is not a FatTree size", g.n())))?;
    let servers = (0..g.n() as u32)
        .filter(|&v| g.neighbors(v).len() == 1)
        .count();
    if servers != params.server_count() || g.edge_count() != params.link_count() {
        return Err(Error::Injection(
            "input graph is not a malfunction-free blueprint".into(),
        ));
    }
    Ok(())
}

/// Applies `spec` to a blueprint graph, returning the malfunctioning
/// physical graph and the exact injected diff. Deterministic given
/// `(g, spec)`.
pub fn inject(g: &DeviceGraph, spec: &MalfunctionSpec) -> Result<(DeviceGraph, GroundTruthDiff)> {
    check_blueprint(g)?;
    if spec.x() >= g.edge_count() && spec.x() > 0 {
        return Err(Error::Injection(format!(
            "{} edits requested against {} links",
            spec.x(),
            g.edge_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = g.clone();
    let mut diff = GroundTruthDiff::default();

    let in_scope = scope_nodes(g, spec.scope);
    let eligible = |v: u32| match spec.scope {
        Scope::SwitchLinksOnly => g.neighbors(v).len() != 1,
        Scope::IncludeServerLinks => true,
    };

    // removals: uniform without replacement over in-scope original links
    let removable: Vec<(u32, u32)> = g
        .edges()
        .filter(|&(u, v)| eligible(u) && eligible(v))
        .collect();
    if spec.removals > removable.len() {
        return Err(Error::Injection(format!(
            "{} removals requested but only {} links in scope",
            spec.removals,
            removable.len()
        )));
    }
    let mut picks: Vec<usize> =
        rand::seq::index::sample(&mut rng, removable.len(), spec.removals).into_vec();
    picks.sort_unstable();
    for i in picks {
        let (u, v) = removable[i];
        out.remove_edge(u, v)?;
        diff.removed.push((u, v));
    }

    // additions: rejection sampling over in-scope node pairs that are
    // non-links in both the original and the current graph
    let mut attempts = 0usize;
    let budget = 1000 * spec.additions + 10_000;
    while diff.added.len() < spec.additions {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Injection(
                "could not find enough addable links in scope".into(),
            ));
        }
        let u = in_scope[rng.random_range(0..in_scope.len())];
        let v = in_scope[rng.random_range(0..in_scope.len())];
        if u == v || g.has_edge(u, v) || out.has_edge(u, v) {
            continue;
        }
        let (u, v) = norm(u, v);
        out.add_edge(u, v)?;
        diff.added.push((u, v));
    }

    // swaps: two disjoint untouched original links rewired crosswise
    for _ in 0..spec.swaps {
        let mut attempts = 0usize;
        loop {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::Injection(
                    "could not find an eligible link pair to swap".into(),
                ));
            }
            let (a, b) = removable[rng.random_range(0..removable.len())];
            let (c, d) = removable[rng.random_range(0..removable.len())];
            if !out.has_edge(a, b) || !out.has_edge(c, d) {
                continue;
            }
            if a == c || a == d || b == c || b == d {
                continue;
            }
            if g.has_edge(a, d) || out.has_edge(a, d) || g.has_edge(c, b) || out.has_edge(c, b) {
                continue;
            }
            out.remove_edge(a, b)?;
            out.remove_edge(c, d)?;
            out.add_edge(a, d)?;
            out.add_edge(c, b)?;
            diff.removed.push((a, b));
            diff.removed.push((c, d));
            diff.added.push(norm(a, d));
            diff.added.push(norm(c, b));
            break;
        }
    }

    diff.removed.sort_unstable();
    diff.added.sort_unstable();
    Ok((out, diff))
}

/// Replaces links (a,b) and (c,d) with (a,d) and (c,b). Every node keeps
/// its degree; the edit counts as four undirected malfunctions.
pub fn swap_links(
    g: &DeviceGraph,
    (a, b): (u32, u32),
    (c, d): (u32, u32),
) -> Result<(DeviceGraph, GroundTruthDiff)> {
    if a == c || a == d || b == c || b == d {
        return Err(Error::Injection("swap links must be disjoint".into()));
    }
    if !g.has_edge(a, b) || !g.has_edge(c, d) {
        return Err(Error::Injection("swap targets must be existing links".into()));
    }
    if g.has_edge(a, d) || g.has_edge(c, b) {
        return Err(Error::Injection("swap replacements already exist".into()));
    }
    let mut out = g.clone();
    out.remove_edge(a, b)?;
    out.remove_edge(c, d)?;
    out.add_edge(a, d)?;
    out.add_edge(c, b)?;
    let mut diff = GroundTruthDiff {
        removed: vec![norm(a, b), norm(c, d)],
        added: vec![norm(a, d), norm(c, b)],
    };
    diff.removed.sort_unstable();
    diff.added.sort_unstable();
    Ok((out, diff))
}

/// Injects one random degree-preserving miswiring into a blueprint graph.
pub fn degree_preserving_miswire(
    g: &DeviceGraph,
    seed: u64,
) -> Result<(DeviceGraph, GroundTruthDiff)> {
    inject(g, &MalfunctionSpec::new(seed).swaps(1))
}
