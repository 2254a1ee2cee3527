//! Weighted undirected input graphs, partitions into components, and the
//! sequential ground-truth oracles.

mod generate;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsu::DisjointSets;

pub use generate::{generate, GeneratorSpec, GraphFamily};
pub use oracle::{msf_weight, oracle_components, oracle_msf};

pub type NodeId = u32;

/// Default exponent `c` in the weight bound `w < n^c`.
pub const DEFAULT_WEIGHT_EXPONENT: u32 = 3;

/// An undirected weighted edge, ordered by `(w, u, v)` with `u < v`.
///
/// This is the tie-breaking order used everywhere a "lightest" edge is
/// chosen, which makes the minimum spanning forest unique.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub w: u64,
    pub u: NodeId,
    pub v: NodeId,
}

impl EdgeKey {
    /// Builds a key with endpoints normalized so that `u < v`.
    pub fn new(a: NodeId, b: NodeId, w: u64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        EdgeKey { w, u, v }
    }

    /// The endpoint that is not `x`.
    pub fn other(&self, x: NodeId) -> NodeId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{})", self.u, self.v, self.w)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop at node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("line {line}: duplicate edge ({u},{v})")]
    Duplicate { line: usize, u: NodeId, v: NodeId },
    #[error("line {line}: node id {id} out of range for n = {n}")]
    IdOutOfRange { line: usize, id: u64, n: usize },
    #[error("line {line}: weight {w} is not below the bound {bound}")]
    WeightOutOfRange { line: usize, w: u64, bound: u64 },
    #[error("invalid generator: {0}")]
    Generator(String),
}

/// An immutable weighted undirected graph on nodes `0..n`.
///
/// Edges are stored once, sorted by `(u, v)`; adjacency is kept in CSR form
/// so that each node's local view is a contiguous slice.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<EdgeKey>,
    offsets: Vec<usize>,
    adjacency: Vec<(NodeId, u64)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("n", &self.n).field("m", &self.edges.len()).finish()
    }
}

/// `n^c`, saturating at `u64::MAX`.
pub fn weight_bound(n: usize, exponent: u32) -> u64 {
    (n as u64).checked_pow(exponent).unwrap_or(u64::MAX)
}

impl Graph {
    /// Builds a graph, validating the structural invariants. Line numbers in
    /// errors count edges from 2 (the edge-list document's first edge line).
    pub fn new<I>(n: usize, edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, u64)>,
    {
        Self::with_weight_exponent(n, edges, DEFAULT_WEIGHT_EXPONENT)
    }

    pub fn with_weight_exponent<I>(n: usize, edges: I, exponent: u32) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId, u64)>,
    {
        let bound = weight_bound(n, exponent);
        let mut keyed = Vec::new();
        for (i, (a, b, w)) in edges.into_iter().enumerate() {
            let line = i + 2;
            for id in [a, b] {
                if id as usize >= n {
                    return Err(GraphError::IdOutOfRange { line, id: id as u64, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { line, node: a });
            }
            if w >= bound {
                return Err(GraphError::WeightOutOfRange { line, w, bound });
            }
            keyed.push((EdgeKey::new(a, b, w), line));
        }
        keyed.sort_by_key(|(e, line)| (e.u, e.v, *line));
        for pair in keyed.windows(2) {
            let (a, b) = (&pair[0].0, &pair[1].0);
            if a.u == b.u && a.v == b.v {
                return Err(GraphError::Duplicate { line: pair[1].1, u: b.u, v: b.v });
            }
        }
        Ok(Self::from_sorted_unchecked(n, keyed.into_iter().map(|(e, _)| e).collect()))
    }

    fn from_sorted_unchecked(n: usize, edges: Vec<EdgeKey>) -> Graph {
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u as usize] += 1;
            degree[e.v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0); offsets[n]];
        for e in &edges {
            adjacency[fill[e.u as usize]] = (e.v, e.w);
            fill[e.u as usize] += 1;
            adjacency[fill[e.v as usize]] = (e.u, e.w);
            fill[e.v as usize] += 1;
        }
        for v in 0..n {
            adjacency[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Graph { n, edges, offsets, adjacency }
    }

    pub fn empty(n: usize) -> Graph {
        Self::from_sorted_unchecked(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// All edges, sorted by `(u, v)`.
    pub fn edges(&self) -> &[EdgeKey] {
        &self.edges
    }

    /// Neighbors of `v` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, u64)] {
        let v = v as usize;
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).len()
    }

    pub fn incident_edges(&self, v: NodeId) -> impl Iterator<Item = EdgeKey> + '_ {
        self.neighbors(v).iter().map(move |&(u, w)| EdgeKey::new(v, u, w))
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors(a).binary_search_by_key(&b, |&(u, _)| u).is_ok()
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<u64> {
        let nb = self.neighbors(a);
        nb.binary_search_by_key(&b, |&(u, _)| u).ok().map(|i| nb[i].1)
    }

    /// Parses the edge-list document: a header line `n m` followed by `m`
    /// lines `u v w` with 0-based ids. Blank trailing lines are ignored.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(GraphError::Parse { line: hline, msg: "header must be \"n m\"".into() });
        }
        let parse_num = |tok: &str, line: usize, what: &str| {
            tok.parse::<u64>().map_err(|_| GraphError::Parse { line, msg: format!("invalid {what} {tok:?}") })
        };
        let n = parse_num(head[0], hline, "node count")? as usize;
        let m = parse_num(head[1], hline, "edge count")? as usize;
        let bound = weight_bound(n, DEFAULT_WEIGHT_EXPONENT);

        let mut edges = Vec::with_capacity(m);
        let mut seen = std::collections::HashSet::with_capacity(m);
        for (line, text) in lines {
            if text.is_empty() {
                continue;
            }
            if edges.len() == m {
                return Err(GraphError::Parse { line, msg: format!("more than {m} edge lines") });
            }
            let tok: Vec<&str> = text.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(GraphError::Parse { line, msg: "edge line must be \"u v w\"".into() });
            }
            let a = parse_num(tok[0], line, "node id")?;
            let b = parse_num(tok[1], line, "node id")?;
            let w = parse_num(tok[2], line, "weight")?;
            for id in [a, b] {
                if id >= n as u64 {
                    return Err(GraphError::IdOutOfRange { line, id, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { line, node: a as NodeId });
            }
            if w >= bound {
                return Err(GraphError::WeightOutOfRange { line, w, bound });
            }
            let e = EdgeKey::new(a as NodeId, b as NodeId, w);
            if !seen.insert((e.u, e.v)) {
                return Err(GraphError::Duplicate { line, u: e.u, v: e.v });
            }
            edges.push(e);
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: hline,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        edges.sort_by_key(|e| (e.u, e.v));
        Ok(Self::from_sorted_unchecked(n, edges))
    }

    /// Canonical edge-list serialization (edges sorted by `(u, v)`).
    pub fn serialize(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
        }
        out
    }

    pub fn into_shared(self) -> Arc<Graph> {
        Arc::new(self)
    }
}

/// Assignment of nodes to components (or fragments), with an active subset.
///
/// Component ids are canonical: the id of a component is its minimum node id.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<NodeId>,
    active: Vec<bool>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Partition")
            .field("n", &self.assignment.len())
            .field("components", &self.count())
            .field("active", &self.active_count())
            .finish()
    }
}

impl Partition {
    /// Every node in its own active component.
    pub fn singletons(n: usize) -> Self {
        Partition { assignment: (0..n as NodeId).collect(), active: vec![true; n] }
    }

    /// Builds a partition from arbitrary labels (equal label = same component),
    /// canonicalizing ids to the minimum member. All components are active.
    pub fn from_labels(labels: &[u64]) -> Self {
        let mut first: BTreeMap<u64, NodeId> = BTreeMap::new();
        let assignment = labels.iter().enumerate().map(|(v, l)| *first.entry(*l).or_insert(v as NodeId)).collect();
        let n = labels.len();
        let mut p = Partition { assignment, active: vec![false; n] };
        for c in p.component_ids() {
            p.active[c as usize] = true;
        }
        p
    }

    /// Components of the node set under the given edges. All are active.
    pub fn from_edges<'a, I: IntoIterator<Item = &'a EdgeKey>>(n: usize, edges: I) -> Self {
        let mut d = DisjointSets::new(n);
        for e in edges {
            d.union(e.u, e.v);
        }
        Self::from_canonical(d.min_labels())
    }

    /// Wraps an assignment that is already canonical (`assignment[c] == c` for
    /// every id `c` in use). All components are active.
    pub fn from_canonical(assignment: Vec<NodeId>) -> Self {
        let n = assignment.len();
        let mut active = vec![false; n];
        for (v, &c) in assignment.iter().enumerate() {
            debug_assert!(c as usize <= v && assignment[c as usize] == c);
            active[c as usize] = true;
        }
        Partition { assignment, active }
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn component_of(&self, v: NodeId) -> NodeId {
        self.assignment[v as usize]
    }

    pub fn assignment(&self) -> &[NodeId] {
        &self.assignment
    }

    pub fn is_active(&self, c: NodeId) -> bool {
        self.active[c as usize] && self.assignment[c as usize] == c
    }

    pub fn set_active(&mut self, c: NodeId, on: bool) {
        assert_eq!(self.assignment[c as usize], c, "{c} is not a component id");
        self.active[c as usize] = on;
    }

    /// Component ids in increasing order.
    pub fn component_ids(&self) -> Vec<NodeId> {
        (0..self.n() as NodeId).filter(|&v| self.assignment[v as usize] == v).collect()
    }

    pub fn active_ids(&self) -> Vec<NodeId> {
        (0..self.n() as NodeId).filter(|&v| self.assignment[v as usize] == v && self.active[v as usize]).collect()
    }

    pub fn count(&self) -> usize {
        self.assignment.iter().enumerate().filter(|(v, &c)| *v as NodeId == c).count()
    }

    pub fn active_count(&self) -> usize {
        self.assignment.iter().enumerate().filter(|(v, &c)| *v as NodeId == c && self.active[*v]).count()
    }

    /// Member lists indexed by component id (empty for non-ids).
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.n()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c as usize].push(v as NodeId);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for &c in &self.assignment {
            out[c as usize] += 1;
        }
        out
    }

    /// Merges components joined by `edges`. A merged component stays active
    /// if any of its parts was active.
    pub fn merged<'a, I: IntoIterator<Item = &'a EdgeKey>>(&self, edges: I) -> Partition {
        let n = self.n();
        let mut d = DisjointSets::new(n);
        for (v, &c) in self.assignment.iter().enumerate() {
            d.union(v as NodeId, c);
        }
        for e in edges {
            d.union(e.u, e.v);
        }
        let assignment = d.min_labels();
        let mut active = vec![false; n];
        for c in self.component_ids() {
            if self.active[c as usize] {
                active[assignment[c as usize] as usize] = true;
            }
        }
        Partition { assignment, active }
    }

    /// Lightest edge from `v` into each other component that `keep` accepts,
    /// sorted by component id. `neighbors` is `v`'s adjacency.
    pub fn lightest_per_component(
        &self,
        v: NodeId,
        neighbors: &[(NodeId, u64)],
        keep: impl Fn(NodeId) -> bool,
    ) -> Vec<(NodeId, EdgeKey)> {
        let own = self.component_of(v);
        let mut out: Vec<(NodeId, EdgeKey)> = neighbors
            .iter()
            .map(|&(u, w)| (self.component_of(u), EdgeKey::new(v, u, w)))
            .filter(|&(c, _)| c != own && keep(c))
            .collect();
        out.sort_unstable();
        out.dedup_by_key(|(c, _)| *c);
        out
    }

    /// Same partition with every component active.
    pub fn all_active(&self) -> Partition {
        Partition::from_canonical(self.assignment.clone())
    }

    /// True when both partitions group the nodes identically (activity ignored).
    pub fn same_components(&self, other: &Partition) -> bool {
        self.assignment == other.assignment
    }
}
