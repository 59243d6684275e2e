//! Device graphs and the primitive measures the detection algorithms consume.
//!
//! A [`DeviceGraph`] is a simple undirected graph over dense node ids
//! `0..n-1` with a side table of opaque device labels. Adjacency lives in
//! one flat sorted-neighbor buffer (CSR layout), which keeps memory
//! proportional to the edge count even at FatTree(100) scale and avoids
//! per-row allocation in the detection hot paths; the dense switch-level
//! bitset view used by the similarity-heavy inner loops lives in
//! [`BitRows`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph over dense node ids with stable device labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceGraph {
    offsets: Vec<u32>,
    flat: Vec<u32>,
    device_ids: Vec<String>,
}

/// One adjacency row: the owner node and its sorted neighbor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRow<'a> {
    pub owner: u32,
    pub neighbors: &'a [u32],
}

fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl DeviceGraph {
    /// Creates an edgeless graph with default decimal labels.
    pub fn new(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            flat: Vec::new(),
            device_ids: default_ids(n),
        }
    }

    /// Creates a graph from an undirected edge list in one pass.
    pub fn with_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut degrees = vec![0u32; n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::NodeOutOfRange {
                    node: u.max(v),
                    n,
                });
            }
            if u == v {
                return Err(Error::InvalidParam(format!("self-loop at node {u}")));
            }
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degrees[v];
        }
        let mut cursor: Vec<u32> = offsets[..n].to_vec();
        let mut flat = vec![0u32; 2 * edges.len()];
        for &(u, v) in edges {
            flat[cursor[u as usize] as usize] = v;
            cursor[u as usize] += 1;
            flat[cursor[v as usize] as usize] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            let row = &mut flat[offsets[v] as usize..offsets[v + 1] as usize];
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParam(format!("duplicate edge at node {v}")));
            }
        }
        Ok(Self {
            offsets,
            flat,
            device_ids: default_ids(n),
        })
    }

    /// Builds a graph from pre-sorted adjacency rows. Internal constructor
    /// for generators that emit rows already sorted and symmetric.
    pub(crate) fn from_rows(adjacency: Vec<Vec<u32>>, device_ids: Option<Vec<String>>) -> Self {
        let n = adjacency.len();
        debug_assert!(adjacency
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] < w[1])));
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        let total: usize = adjacency.iter().map(Vec::len).sum();
        let mut flat = Vec::with_capacity(total);
        for row in &adjacency {
            flat.extend_from_slice(row);
            offsets.push(flat.len() as u32);
        }
        let device_ids = device_ids.unwrap_or_else(|| default_ids(n));
        debug_assert_eq!(device_ids.len(), n);
        Self {
            offsets,
            flat,
            device_ids,
        }
    }

    /// Internal constructor from a pre-filled CSR buffer.
    pub(crate) fn from_csr(offsets: Vec<u32>, flat: Vec<u32>, device_ids: Vec<String>) -> Self {
        debug_assert_eq!(offsets.len(), device_ids.len() + 1);
        debug_assert_eq!(*offsets.last().unwrap() as usize, flat.len());
        Self {
            offsets,
            flat,
            device_ids,
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn device_ids(&self) -> &[String] {
        &self.device_ids
    }

    pub fn device_id(&self, v: u32) -> &str {
        &self.device_ids[v as usize]
    }

    pub fn set_device_ids(&mut self, ids: Vec<String>) -> Result<()> {
        if ids.len() != self.n() {
            return Err(Error::SizeMismatch {
                left: ids.len(),
                right: self.n(),
            });
        }
        self.device_ids = ids;
        Ok(())
    }

    fn check_node(&self, v: u32) -> Result<()> {
        if (v as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                n: self.n(),
            })
        }
    }

    /// Sorted neighbor list of `v`. Panics if `v` is out of range.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.flat[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// The adjacency row of `v`.
    pub fn row(&self, v: u32) -> Result<NodeRow<'_>> {
        self.check_node(v)?;
        Ok(NodeRow {
            owner: v,
            neighbors: self.neighbors(v),
        })
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        u != v && (u as usize) < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    fn splice_in(&mut self, u: u32, v: u32) {
        let row_start = self.offsets[u as usize] as usize;
        let pos = match self.neighbors(u).binary_search(&v) {
            Err(p) => row_start + p,
            Ok(_) => unreachable!("caller checked the edge is absent"),
        };
        self.flat.insert(pos, v);
        for o in &mut self.offsets[u as usize + 1..] {
            *o += 1;
        }
    }

    fn splice_out(&mut self, u: u32, v: u32) {
        let row_start = self.offsets[u as usize] as usize;
        let pos = row_start
            + self
                .neighbors(u)
                .binary_search(&v)
                .expect("caller checked the edge exists");
        self.flat.remove(pos);
        for o in &mut self.offsets[u as usize + 1..] {
            *o -= 1;
        }
    }

    /// Inserts the undirected edge (u,v). Linear in the graph size; bulk
    /// construction should go through [`DeviceGraph::with_edges`].
    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::InvalidParam(format!("self-loop at node {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::InvalidParam(format!("duplicate edge ({u},{v})")));
        }
        // higher row first so the lower row's offsets stay valid
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        self.splice_in(hi, lo);
        self.splice_in(lo, hi);
        Ok(())
    }

    /// Removes the undirected edge (u,v).
    pub fn remove_edge(&mut self, u: u32, v: u32) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if !self.has_edge(u, v) {
            return Err(Error::InvalidParam(format!("missing edge ({u},{v})")));
        }
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        self.splice_out(hi, lo);
        self.splice_out(lo, hi);
        Ok(())
    }

    /// Number of links incident to `v`.
    pub fn degree(&self, v: u32) -> Result<usize> {
        self.check_node(v)?;
        Ok(self.neighbors(v).len())
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.flat.len() / 2
    }

    /// Iterates undirected edges as (u,v) pairs with u < v, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Count of common direct neighbors of `u` and `v` — the inner product
    /// of their adjacency rows. Symmetric in its arguments.
    pub fn similarity(&self, u: u32, v: u32) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        Ok(sorted_intersection_len(self.neighbors(u), self.neighbors(v)))
    }

    /// Count of ordered pairs (u,v) at which the two adjacency relations
    /// disagree. Always even for symmetric relations: one undirected edit
    /// flips two matrix entries.
    pub fn hamming_distance(&self, other: &DeviceGraph) -> Result<usize> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let mut total = 0;
        for v in 0..self.n() as u32 {
            let a = self.neighbors(v);
            let b = other.neighbors(v);
            total += a.len() + b.len() - 2 * sorted_intersection_len(a, b);
        }
        Ok(total)
    }

    /// Count of undirected edges present in both graphs at identical
    /// endpoints (the identity alignment).
    pub fn common_edges(&self, other: &DeviceGraph) -> Result<usize> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let mut total = 0;
        for v in 0..self.n() as u32 {
            total += sorted_intersection_len(self.neighbors(v), other.neighbors(v));
        }
        Ok(total / 2)
    }

    /// Deterministic 64-bit digest of the sorted neighbor list of `v`.
    /// Nodes with identical neighbor sets hash identically; unequal rows may
    /// collide, so any grouping built on fingerprints must confirm equality
    /// with an exact row comparison.
    pub fn row_fingerprint(&self, v: u32) -> Result<u64> {
        self.check_node(v)?;
        Ok(fingerprint_neighbors(self.neighbors(v)))
    }

    /// Induced subgraph on `keep` (ascending node ids), relabelled densely.
    /// Returns the subgraph together with the new-id -> old-id table.
    pub fn induced_subgraph(&self, keep: &[u32]) -> (DeviceGraph, Vec<u32>) {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut old_to_new = vec![u32::MAX; self.n()];
        for (new, &old) in keep.iter().enumerate() {
            old_to_new[old as usize] = new as u32;
        }
        let mut offsets = Vec::with_capacity(keep.len() + 1);
        offsets.push(0u32);
        let mut flat = Vec::with_capacity(self.flat.len());
        for &old in keep {
            for &w in self.neighbors(old) {
                let nw = old_to_new[w as usize];
                if nw != u32::MAX {
                    flat.push(nw);
                }
            }
            offsets.push(flat.len() as u32);
        }
        let device_ids = keep
            .iter()
            .map(|&old| self.device_ids[old as usize].clone())
            .collect();
        (
            DeviceGraph {
                offsets,
                flat,
                device_ids,
            },
            keep.to_vec(),
        )
    }

    // ---- file formats ----

    /// Line-oriented text format: `n <count>` header, then one `e <u> <v>`
    /// line per undirected edge with u < v, sorted. Device labels are not
    /// carried; round-trips are byte-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.edge_count());
        out.push_str(&format!("n {}\n", self.n()));
        for (u, v) in self.edges() {
            out.push_str(&format!("e {u} {v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let n: usize = header
            .strip_prefix("n ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header line: {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let body = line
                .strip_prefix("e ")
                .ok_or_else(|| Error::Parse(format!("bad edge line: {line:?}")))?;
            let mut it = body.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(u), Some(v), None) => (u, v),
                _ => return Err(Error::Parse(format!("bad edge line: {line:?}"))),
            };
            let u: u32 = u
                .parse()
                .map_err(|_| Error::Parse(format!("bad node id {u:?}")))?;
            let v: u32 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad node id {v:?}")))?;
            edges.push((u, v));
        }
        Self::with_edges(n, &edges).map_err(|e| Error::Parse(format!("bad edge list: {e}")))
    }

    /// JSON variant carrying device labels.
    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            n: self.n(),
            device_ids: self.device_ids.clone(),
            edges: self.edges().collect(),
        };
        let mut s = serde_json::to_string(&doc).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        if doc.device_ids.len() != doc.n {
            return Err(Error::Parse(format!(
                "device_ids length {} does not match n {}",
                doc.device_ids.len(),
                doc.n
            )));
        }
        let mut g = Self::with_edges(doc.n, &doc.edges)
            .map_err(|e| Error::Parse(format!("bad edge list: {e}")))?;
        g.device_ids = doc.device_ids;
        Ok(g)
    }

    /// Reads either format, sniffing JSON by its leading `{`.
    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_text(&text)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    device_ids: Vec<String>,
    edges: Vec<(u32, u32)>,
}

impl fmt::Display for DeviceGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DeviceGraph(n={}, edges={})", self.n(), self.edge_count())
    }
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// FNV-1a over the little-endian bytes of the sorted neighbor ids. Stable
/// across runs and platforms.
fn fingerprint_neighbors(neighbors: &[u32]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for &v in neighbors {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// Dense bit-packed adjacency rows. Similarity between two nodes — and
/// against arbitrary node-set masks — reduces to a popcount over the AND of
/// two rows. Built from switch-scale graphs where the quadratic greedy
/// assignment dominates runtime.
pub struct BitRows {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitRows {
    pub fn from_graph(g: &DeviceGraph) -> Self {
        let n = g.n();
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for v in 0..n as u32 {
            let base = v as usize * words;
            for &w in g.neighbors(v) {
                bits[base + (w as usize >> 6)] |= 1u64 << (w & 63);
            }
        }
        Self { n, words, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn row(&self, v: u32) -> &[u64] {
        let base = v as usize * self.words;
        &self.bits[base..base + self.words]
    }

    /// Inner product of two adjacency rows.
    pub fn and_count(&self, u: u32, v: u32) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Inner product of `v`'s row with an arbitrary node-set mask.
    pub fn mask_count(&self, v: u32, mask: &[u64]) -> usize {
        self.row(v)
            .iter()
            .zip(mask)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Empty mask sized for this graph.
    pub fn empty_mask(&self) -> Vec<u64> {
        vec![0u64; self.words]
    }

    pub fn set_in_mask(mask: &mut [u64], v: u32) {
        mask[v as usize >> 6] |= 1u64 << (v & 63);
    }
}
